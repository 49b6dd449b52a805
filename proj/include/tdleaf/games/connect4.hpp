// Connect-four on a reduced board: 5 columns, 4 rows, four in a row wins.
// X (mark 1) moves first.
//
// Serialization: rows from top to bottom separated by '/', five cells each
// ('x', 'o', '.'), then ':' and the Learner's mark, e.g.
// "...../...../...../..x..:x". Actions are column indices named "d0".."d4".

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tdleaf/core.hpp"

namespace tdleaf::games {

class Connect4 {
 public:
  static constexpr bool kStochastic = false;
  static constexpr bool kAntisymmetricFeatures = true;
  static constexpr int kColumns = 5;
  static constexpr int kRows = 4;

  enum Mark : std::int8_t { kEmpty = 0, kX = 1, kO = 2 };

  // cells[col * kRows + row], row 0 at the bottom.
  struct State {
    std::array<std::int8_t, kColumns * kRows> cells{};
    std::int8_t learner = kX;

    friend bool operator==(const State&, const State&) = default;
  };
  using Action = int;

  static constexpr int at(int col, int row) { return col * kRows + row; }

  // Every segment of four cells: 8 horizontal, 5 vertical, 4 diagonal.
  static const std::vector<std::array<int, 4>>& lines() {
    static const std::vector<std::array<int, 4>> kLines = [] {
      std::vector<std::array<int, 4>> out;
      const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
      for (const auto& d : dirs)
        for (int c = 0; c < kColumns; ++c)
          for (int r = 0; r < kRows; ++r) {
            const int ec = c + 3 * d[0], er = r + 3 * d[1];
            if (ec < 0 || ec >= kColumns || er < 0 || er >= kRows) continue;
            std::array<int, 4> line{};
            for (int i = 0; i < 4; ++i) line[i] = at(c + i * d[0], r + i * d[1]);
            out.push_back(line);
          }
      return out;
    }();
    return kLines;
  }

  std::string_view id() const { return "connect4"; }

  std::vector<ChanceEvent> opening_events() const { return {kUnitEvent}; }

  State initial(Side first_mover, const ChanceEvent& = kUnitEvent) const {
    State s;
    s.learner = first_mover == Side::Learner ? kX : kO;
    return s;
  }

  static std::int8_t mark_to_move(const State& s) {
    int x = 0, o = 0;
    for (auto c : s.cells) {
      x += c == kX;
      o += c == kO;
    }
    return x == o ? kX : kO;
  }

  static std::int8_t winner(const State& s) {
    for (const auto& line : lines()) {
      const auto m = s.cells[line[0]];
      if (m != kEmpty && m == s.cells[line[1]] && m == s.cells[line[2]] && m == s.cells[line[3]])
        return m;
    }
    return kEmpty;
  }

  static int height(const State& s, int col) {
    int h = 0;
    while (h < kRows && s.cells[at(col, h)] != kEmpty) ++h;
    return h;
  }

  bool is_terminal(const State& s) const {
    if (winner(s) != kEmpty) return true;
    for (int c = 0; c < kColumns; ++c)
      if (height(s, c) < kRows) return false;
    return true;
  }

  Side side_to_move(const State& s) const {
    return mark_to_move(s) == s.learner ? Side::Learner : Side::Opponent;
  }

  std::vector<Action> legal_actions(const State& s) const {
    std::vector<Action> out;
    if (is_terminal(s)) return out;
    for (int c = 0; c < kColumns; ++c)
      if (height(s, c) < kRows) out.push_back(c);
    return out;
  }

  std::vector<ChanceEvent> chance_events(const State&, const Action&) const { return {kUnitEvent}; }

  State apply(const State& s, const Action& a, const ChanceEvent& = kUnitEvent) const {
    if (a < 0 || a >= kColumns || height(s, a) == kRows || is_terminal(s))
      throw Error("illegal action " + action_name(a) + " in state " + serialize(s));
    State next = s;
    next.cells[at(a, height(s, a))] = mark_to_move(s);
    return next;
  }

  Reward terminal_reward(const State& s) const {
    if (!is_terminal(s)) throw Error("reward undefined before termination: " + serialize(s));
    const auto w = winner(s);
    if (w == kEmpty) return 0.0;
    return w == s.learner ? 1.0 : -1.0;
  }

  State mirror(const State& s) const {
    State m = s;
    m.learner = s.learner == kX ? kO : kX;
    return m;
  }

  std::size_t feature_count() const { return 4; }

  std::vector<std::string> feature_names() const {
    return {"open_three_diff", "open_two_diff", "open_one_diff", "center_column_diff"};
  }

  FeatureVector features(const State& s) const {
    const auto mine = s.learner;
    FeatureVector f(4, 0.0);
    for (const auto& line : lines()) {
      int own = 0, opp = 0;
      for (int cell : line) {
        own += s.cells[cell] == mine;
        opp += s.cells[cell] != kEmpty && s.cells[cell] != mine;
      }
      if (own > 0 && opp > 0) continue;
      const double sign = opp == 0 ? 1.0 : -1.0;
      const int count = opp == 0 ? own : opp;
      if (count >= 1 && count <= 3) f[3 - count] += sign;
    }
    for (int r = 0; r < kRows; ++r) {
      const auto c = s.cells[at(kColumns / 2, r)];
      if (c != kEmpty) f[3] += c == mine ? 1.0 : -1.0;
    }
    return f;
  }

  std::vector<double> reference_weights() const { return {0.3, 0.1, 0.02, 0.05}; }

  std::string serialize(const State& s) const {
    std::string out;
    for (int r = kRows - 1; r >= 0; --r) {
      for (int c = 0; c < kColumns; ++c) {
        const auto m = s.cells[at(c, r)];
        out += m == kX ? 'x' : m == kO ? 'o' : '.';
      }
      if (r > 0) out += '/';
    }
    out += ':';
    out += s.learner == kX ? 'x' : 'o';
    return out;
  }

  State parse(std::string_view text) const {
    const auto bad = [&](std::string_view why) {
      return Error("malformed connect4 state '" + std::string(text) + "': " + std::string(why));
    };
    constexpr std::size_t kLen = kRows * (kColumns + 1) - 1 + 2;
    if (text.size() != kLen) throw bad("wrong length");
    State s;
    std::size_t pos = 0;
    int x = 0, o = 0;
    for (int r = kRows - 1; r >= 0; --r) {
      for (int c = 0; c < kColumns; ++c, ++pos) {
        switch (text[pos]) {
          case 'x': s.cells[at(c, r)] = kX; ++x; break;
          case 'o': s.cells[at(c, r)] = kO; ++o; break;
          case '.': break;
          default: throw bad("unknown cell");
        }
      }
      if (r > 0 && text[pos++] != '/') throw bad("missing row separator");
    }
    if (text[pos] != ':' || (text[pos + 1] != 'x' && text[pos + 1] != 'o')) throw bad("learner mark");
    for (int c = 0; c < kColumns; ++c)
      for (int r = height(s, c); r < kRows; ++r)
        if (s.cells[at(c, r)] != kEmpty) throw bad("floating piece");
    if (x != o && x != o + 1) throw bad("mark counts");
    s.learner = text[pos + 1] == 'x' ? kX : kO;
    return s;
  }

  std::string action_name(const Action& a) const { return "d" + std::to_string(a); }

  Action parse_action(const State& s, std::string_view text) const {
    for (Action a : legal_actions(s))
      if (action_name(a) == text) return a;
    throw Error("illegal action '" + std::string(text) + "' in state " + serialize(s));
  }
};

}  // namespace tdleaf::games
