// Tic-tac-toe on a 3x3 board. X always moves first; the Learner may hold
// either mark.
//
// Serialization: nine cells in index order ('x', 'o', '.') followed by ':'
// and the Learner's mark, e.g. "x...o....:x". Cell i sits at row i/3,
// column i%3. Actions are cell indices, named "c0".."c8".

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tdleaf/core.hpp"

namespace tdleaf::games {

class TicTacToe {
 public:
  static constexpr bool kStochastic = false;
  static constexpr bool kAntisymmetricFeatures = true;

  enum Mark : std::int8_t { kEmpty = 0, kX = 1, kO = 2 };

  struct State {
    std::array<std::int8_t, 9> cells{};
    std::int8_t learner = kX;

    friend bool operator==(const State&, const State&) = default;
  };
  using Action = int;

  static constexpr std::array<std::array<int, 3>, 8> kLines{{
      {0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6}, {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}}};

  std::string_view id() const { return "tictactoe"; }

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
    for (const auto& line : kLines) {
      const auto m = s.cells[line[0]];
      if (m != kEmpty && m == s.cells[line[1]] && m == s.cells[line[2]]) return m;
    }
    return kEmpty;
  }

  bool is_terminal(const State& s) const {
    if (winner(s) != kEmpty) return true;
    for (auto c : s.cells)
      if (c == kEmpty) return false;
    return true;
  }

  Side side_to_move(const State& s) const {
    return mark_to_move(s) == s.learner ? Side::Learner : Side::Opponent;
  }

  std::vector<Action> legal_actions(const State& s) const {
    std::vector<Action> out;
    if (is_terminal(s)) return out;
    for (int i = 0; i < 9; ++i)
      if (s.cells[i] == kEmpty) out.push_back(i);
    return out;
  }

  std::vector<ChanceEvent> chance_events(const State&, const Action&) const { return {kUnitEvent}; }

  State apply(const State& s, const Action& a, const ChanceEvent& = kUnitEvent) const {
    if (a < 0 || a > 8 || s.cells[a] != kEmpty || is_terminal(s))
      throw Error("illegal action " + action_name(a) + " in state " + serialize(s));
    State next = s;
    next.cells[a] = mark_to_move(s);
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
    return {"open_two_diff", "open_one_diff", "center", "corner_diff"};
  }

  // Lines holding only one player's marks count as open for that player.
  FeatureVector features(const State& s) const {
    const auto mine = s.learner;
    FeatureVector f(4, 0.0);
    for (const auto& line : kLines) {
      int own = 0, opp = 0;
      for (int cell : line) {
        own += s.cells[cell] == mine;
        opp += s.cells[cell] != kEmpty && s.cells[cell] != mine;
      }
      const double sign = opp == 0 ? 1.0 : (own == 0 ? -1.0 : 0.0);
      const int count = opp == 0 ? own : opp;
      if (sign == 0.0) continue;
      if (count == 2) f[0] += sign;
      if (count == 1) f[1] += sign;
    }
    auto owner = [&](int cell) {
      if (s.cells[cell] == kEmpty) return 0.0;
      return s.cells[cell] == mine ? 1.0 : -1.0;
    };
    f[2] = owner(4);
    f[3] = owner(0) + owner(2) + owner(6) + owner(8);
    return f;
  }

  std::vector<double> reference_weights() const { return {0.5, 0.1, 0.2, 0.05}; }

  std::string serialize(const State& s) const {
    std::string out;
    for (auto c : s.cells) out += c == kX ? 'x' : c == kO ? 'o' : '.';
    out += ':';
    out += s.learner == kX ? 'x' : 'o';
    return out;
  }

  State parse(std::string_view text) const {
    if (text.size() != 11 || text[9] != ':' || (text[10] != 'x' && text[10] != 'o'))
      throw Error("malformed tictactoe state '" + std::string(text) + "'");
    State s;
    int x = 0, o = 0;
    for (int i = 0; i < 9; ++i) {
      switch (text[i]) {
        case 'x': s.cells[i] = kX; ++x; break;
        case 'o': s.cells[i] = kO; ++o; break;
        case '.': s.cells[i] = kEmpty; break;
        default: throw Error("malformed tictactoe state '" + std::string(text) + "'");
      }
    }
    if (x != o && x != o + 1) throw Error("unreachable tictactoe state '" + std::string(text) + "'");
    s.learner = text[10] == 'x' ? kX : kO;
    return s;
  }

  std::string action_name(const Action& a) const { return "c" + std::to_string(a); }

  Action parse_action(const State& s, std::string_view text) const {
    for (Action a : legal_actions(s))
      if (action_name(a) == text) return a;
    throw Error("illegal action '" + std::string(text) + "' in state " + serialize(s));
  }
};

}  // namespace tdleaf::games
