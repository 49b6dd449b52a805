// Gardner 5x5 minichess with material-centric features.
//
// Rules are simplified for desk-scale experiments: moves are pseudo-legal
// (a king may walk into check), capturing the king wins, pawns step one
// square and promote to a queen, there is no castling or en passant. The game
// is drawn when the side to move has no move or when the ply cap is reached.
//
// Serialization: FEN-like placement from rank 5 down to rank 1 separated by
// '/', then ":<side to move w|b>:<learner colour w|b>:<ply>", e.g.
// "rnbqk/ppppp/5/PPPPP/RNBQK:w:w:0". Actions are named by coordinates,
// "b2b3".

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "tdleaf/core.hpp"

namespace tdleaf::games {

class Minichess {
 public:
  static constexpr bool kStochastic = false;
  static constexpr bool kAntisymmetricFeatures = true;
  static constexpr int kSize = 5;

  enum Piece : std::int8_t { kNone = 0, kPawn = 1, kKnight, kBishop, kRook, kQueen, kKing };

  // board[rank * 5 + file]; white pieces positive, black negative.
  struct State {
    std::array<std::int8_t, kSize * kSize> board{};
    bool white_to_move = true;
    bool learner_white = true;
    std::int16_t ply = 0;

    friend bool operator==(const State&, const State&) = default;
  };

  struct Action {
    std::int8_t from = 0;
    std::int8_t to = 0;

    friend bool operator==(const Action&, const Action&) = default;
    friend auto operator<=>(const Action&, const Action&) = default;
  };

  explicit Minichess(int ply_cap = 100) : ply_cap_(ply_cap) {}

  int ply_cap() const { return ply_cap_; }

  std::string_view id() const { return "minichess"; }

  std::vector<ChanceEvent> opening_events() const { return {kUnitEvent}; }

  State initial(Side first_mover, const ChanceEvent& = kUnitEvent) const {
    State s;
    const std::int8_t back[kSize] = {kRook, kKnight, kBishop, kQueen, kKing};
    for (int f = 0; f < kSize; ++f) {
      s.board[f] = back[f];
      s.board[kSize + f] = kPawn;
      s.board[3 * kSize + f] = -kPawn;
      s.board[4 * kSize + f] = static_cast<std::int8_t>(-back[f]);
    }
    s.learner_white = first_mover == Side::Learner;
    return s;
  }

  static bool has_king(const State& s, bool white) {
    const std::int8_t k = white ? kKing : -kKing;
    return std::find(s.board.begin(), s.board.end(), k) != s.board.end();
  }

  // Step and ray tables per square. Directions 0-3 are diagonal, 4-7
  // orthogonal; rays list squares outward and end at the board edge.
  struct Tables {
    std::array<std::array<std::int8_t, 8>, kSize * kSize> knight{}, king{};
    std::array<std::int8_t, kSize * kSize> knight_count{}, king_count{};
    std::array<std::array<std::array<std::int8_t, kSize>, 8>, kSize * kSize> ray{};
    std::array<std::array<std::int8_t, 8>, kSize * kSize> ray_length{};
  };

  static const Tables& tables() {
    static const Tables t = [] {
      Tables t;
      constexpr int kKnight[8][2] = {{-2, -1}, {-2, 1}, {-1, -2}, {-1, 2}, {1, -2}, {1, 2}, {2, -1}, {2, 1}};
      constexpr int kDirs[8][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}, {-1, 0}, {0, -1}, {0, 1}, {1, 0}};
      auto inside = [](int r, int f) { return r >= 0 && r < kSize && f >= 0 && f < kSize; };
      for (int sq = 0; sq < kSize * kSize; ++sq) {
        const int r = sq / kSize, f = sq % kSize;
        for (const auto& d : kKnight)
          if (inside(r + d[0], f + d[1]))
            t.knight[sq][t.knight_count[sq]++] = static_cast<std::int8_t>((r + d[0]) * kSize + f + d[1]);
        for (int d = 0; d < 8; ++d) {
          if (inside(r + kDirs[d][0], f + kDirs[d][1]))
            t.king[sq][t.king_count[sq]++] = static_cast<std::int8_t>((r + kDirs[d][0]) * kSize + f + kDirs[d][1]);
          for (int rr = r + kDirs[d][0], ff = f + kDirs[d][1]; inside(rr, ff); rr += kDirs[d][0], ff += kDirs[d][1])
            t.ray[sq][d][t.ray_length[sq][d]++] = static_cast<std::int8_t>(rr * kSize + ff);
        }
      }
      return t;
    }();
    return t;
  }

  // Calls visit(to) for every pseudo-legal destination of the piece on sq;
  // stops early when visit returns false.
  template <typename Visit>
  static bool each_move_from(const State& s, int sq, Visit&& visit) {
    const int sign = s.board[sq] > 0 ? 1 : -1;
    const auto& t = tables();
    auto steps = [&](const std::array<std::int8_t, 8>& to, int n) {
      for (int i = 0; i < n; ++i)
        if (s.board[to[i]] * sign <= 0 && !visit(to[i])) return false;
      return true;
    };
    auto rays = [&](int first, int last) {
      for (int d = first; d < last; ++d)
        for (int i = 0; i < t.ray_length[sq][d]; ++i) {
          const int to = t.ray[sq][d][i];
          const int occupant = s.board[to] * sign;
          if (occupant > 0) break;
          if (!visit(to)) return false;
          if (occupant < 0) break;
        }
      return true;
    };
    switch (std::abs(s.board[sq])) {
      case kPawn: {
        const int r = sq / kSize, f = sq % kSize;
        const int rr = r + sign;
        if (rr < 0 || rr >= kSize) return true;
        auto enemy = [&](int to) { return s.board[to] * sign < 0; };
        if (f > 0 && enemy(rr * kSize + f - 1) && !visit(rr * kSize + f - 1)) return false;
        if (s.board[rr * kSize + f] == kNone && !visit(rr * kSize + f)) return false;
        if (f < kSize - 1 && enemy(rr * kSize + f + 1) && !visit(rr * kSize + f + 1)) return false;
        return true;
      }
      case kKnight: return steps(t.knight[sq], t.knight_count[sq]);
      case kBishop: return rays(0, 4);
      case kRook: return rays(4, 8);
      case kQueen: return rays(0, 8);
      case kKing: return steps(t.king[sq], t.king_count[sq]);
      default: return true;
    }
  }

  template <typename Visit>
  static void each_move(const State& s, bool white, Visit&& visit) {
    const int sign = white ? 1 : -1;
    for (int sq = 0; sq < kSize * kSize; ++sq)
      if (s.board[sq] * sign > 0 && !each_move_from(s, sq, [&](int to) { return visit(sq, to); })) return;
  }

  // Pseudo-legal moves for one colour, ascending by (from, to).
  static std::vector<Action> moves_for(const State& s, bool white) {
    std::vector<Action> out;
    out.reserve(32);
    each_move(s, white, [&](int from, int to) {
      out.push_back({static_cast<std::int8_t>(from), static_cast<std::int8_t>(to)});
      return true;
    });
    std::sort(out.begin(), out.end());
    return out;
  }

  static std::size_t count_moves(const State& s, bool white) {
    std::size_t n = 0;
    each_move(s, white, [&](int, int) { return ++n, true; });
    return n;
  }

  static bool has_move(const State& s, bool white) {
    bool any = false;
    each_move(s, white, [&](int, int) { return any = true, false; });
    return any;
  }

  bool is_terminal(const State& s) const {
    if (!has_king(s, true) || !has_king(s, false)) return true;
    if (s.ply >= ply_cap_) return true;
    return !has_move(s, s.white_to_move);
  }

  Side side_to_move(const State& s) const {
    return s.white_to_move == s.learner_white ? Side::Learner : Side::Opponent;
  }

  std::vector<Action> legal_actions(const State& s) const {
    if (!has_king(s, true) || !has_king(s, false) || s.ply >= ply_cap_) return {};
    return moves_for(s, s.white_to_move);
  }

  std::vector<ChanceEvent> chance_events(const State&, const Action&) const { return {kUnitEvent}; }

  State apply(const State& s, const Action& a, const ChanceEvent& = kUnitEvent) const {
    bool legal = a.from >= 0 && a.from < kSize * kSize && a.to >= 0 && a.to < kSize * kSize &&
                 s.board[a.from] * (s.white_to_move ? 1 : -1) > 0 && has_king(s, true) && has_king(s, false) &&
                 s.ply < ply_cap_;
    if (legal) {
      legal = false;
      each_move_from(s, a.from, [&](int to) { return !(legal = to == a.to); });
    }
    if (!legal)
      throw Error("illegal action " + action_name(a) + " in state " + serialize(s));
    State next = s;
    std::int8_t piece = s.board[a.from];
    const int to_rank = a.to / kSize;
    if (std::abs(piece) == kPawn && (to_rank == 0 || to_rank == kSize - 1))
      piece = static_cast<std::int8_t>(piece > 0 ? kQueen : -kQueen);
    next.board[a.to] = piece;
    next.board[a.from] = kNone;
    next.white_to_move = !s.white_to_move;
    next.ply = static_cast<std::int16_t>(s.ply + 1);
    return next;
  }

  Reward terminal_reward(const State& s) const {
    if (!is_terminal(s)) throw Error("reward undefined before termination: " + serialize(s));
    const bool white_king = has_king(s, true), black_king = has_king(s, false);
    if (white_king && black_king) return 0.0;
    const bool white_won = white_king;
    return white_won == s.learner_white ? 1.0 : -1.0;
  }

  State mirror(const State& s) const {
    State m = s;
    m.learner_white = !s.learner_white;
    return m;
  }

  std::size_t feature_count() const { return 8; }

  std::vector<std::string> feature_names() const {
    return {"material_pawn", "material_knight", "material_bishop", "material_rook",
            "material_queen", "mobility_diff",  "pawn_advance_diff", "center_diff"};
  }

  // Material counts are learner minus opponent. Mobility and pawn advancement
  // are scaled by 0.1 so that a unit weight is comparable to one pawn.
  FeatureVector features(const State& s) const {
    FeatureVector f(8, 0.0);
    const int learner_sign = s.learner_white ? 1 : -1;
    for (int sq = 0; sq < kSize * kSize; ++sq) {
      const int p = s.board[sq];
      if (p == kNone) continue;
      const double sign = (p > 0 ? 1 : -1) == learner_sign ? 1.0 : -1.0;
      const int kind = std::abs(p);
      if (kind >= kPawn && kind <= kQueen) f[kind - 1] += sign;
      const int r = sq / kSize, file = sq % kSize;
      if (kind == kPawn) f[6] += 0.1 * sign * (p > 0 ? r - 1 : kSize - 2 - r);
      if (kind != kKing && r >= 1 && r <= 3 && file >= 1 && file <= 3) f[7] += sign;
    }
    const double own_moves = static_cast<double>(count_moves(s, s.learner_white));
    const double opp_moves = static_cast<double>(count_moves(s, !s.learner_white));
    f[5] = 0.1 * (own_moves - opp_moves);
    return f;
  }

  std::vector<double> reference_weights() const { return {1, 4, 4, 6, 12, 0, 0, 0}; }

  static char piece_char(std::int8_t p) {
    constexpr std::string_view kChars = ".pnbrqk";
    const char c = kChars[std::abs(p)];
    return p > 0 ? static_cast<char>(c - 'a' + 'A') : c;
  }

  std::string serialize(const State& s) const {
    std::string out;
    for (int r = kSize - 1; r >= 0; --r) {
      int empty = 0;
      for (int f = 0; f < kSize; ++f) {
        const auto p = s.board[r * kSize + f];
        if (p == kNone) {
          ++empty;
          continue;
        }
        if (empty) out += static_cast<char>('0' + empty);
        empty = 0;
        out += piece_char(p);
      }
      if (empty) out += static_cast<char>('0' + empty);
      if (r > 0) out += '/';
    }
    out += s.white_to_move ? ":w" : ":b";
    out += s.learner_white ? ":w:" : ":b:";
    out += std::to_string(s.ply);
    return out;
  }

  State parse(std::string_view text) const {
    const auto bad = [&](std::string_view why) {
      return Error("malformed minichess state '" + std::string(text) + "': " + std::string(why));
    };
    State s;
    std::size_t pos = 0;
    for (int r = kSize - 1; r >= 0; --r) {
      int f = 0;
      while (f < kSize) {
        if (pos >= text.size()) throw bad("truncated placement");
        const char c = text[pos++];
        if (c >= '1' && c <= '5') {
          f += c - '0';
          continue;
        }
        const auto idx = std::string_view(".pnbrqk").find(static_cast<char>(c | 0x20));
        if (idx == std::string_view::npos || idx == 0) throw bad("unknown piece");
        const auto kind = static_cast<std::int8_t>(idx);
        s.board[r * kSize + f] = (c >= 'A' && c <= 'Z') ? kind : static_cast<std::int8_t>(-kind);
        ++f;
      }
      if (f != kSize) throw bad("rank overflow");
      if (r > 0 && (pos >= text.size() || text[pos++] != '/')) throw bad("missing rank separator");
    }
    if (text.size() < pos + 6 || text[pos] != ':' || text[pos + 2] != ':' || text[pos + 4] != ':')
      throw bad("missing side fields");
    const char stm = text[pos + 1], learner = text[pos + 3];
    if ((stm != 'w' && stm != 'b') || (learner != 'w' && learner != 'b')) throw bad("side fields");
    s.white_to_move = stm == 'w';
    s.learner_white = learner == 'w';
    int ply = 0;
    const auto tail = text.substr(pos + 5);
    const auto [end, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), ply);
    if (ec != std::errc() || end != tail.data() + tail.size() || ply < 0) throw bad("ply");
    s.ply = static_cast<std::int16_t>(ply);
    return s;
  }

  std::string action_name(const Action& a) const {
    std::string out;
    for (int sq : {static_cast<int>(a.from), static_cast<int>(a.to)}) {
      out += static_cast<char>('a' + sq % kSize);
      out += static_cast<char>('1' + sq / kSize);
    }
    return out;
  }

  Action parse_action(const State& s, std::string_view text) const {
    for (const Action& a : legal_actions(s))
      if (action_name(a) == text) return a;
    throw Error("illegal action '" + std::string(text) + "' in state " + serialize(s));
  }

 private:
  int ply_cap_;
};

}  // namespace tdleaf::games
