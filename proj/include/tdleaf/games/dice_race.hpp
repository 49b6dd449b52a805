// Dice race: a minimal stochastic race with hitting, standing in for
// backgammon.
//
// Each player owns two tokens that travel `track_length` steps from start
// (progress 0) to home (progress track_length). Player 0 always moves first.
// The two players run the shared cells 1..track_length-1 in opposite
// directions: player 0's progress q sits on cell q, player 1's on cell
// track_length - q. The side to move holds a die roll in 1..faces and picks
// which token to advance; overshooting home is clamped. Landing on a cell
// held by exactly one opposing token sends that token back to start. After
// every non-final move a fresh roll for the next mover is drawn uniformly.
// First to bring both tokens home wins; reaching the ply cap is a draw.
//
// Serialization: "a,b|c,d:<to move 0|1>:<roll>:<learner 0|1>:<ply>" where
// a,b are player 0's token progresses and c,d player 1's, e.g.
// "0,0|0,0:0:2:0:0". Actions are token indices named "t0"/"t1"; chance
// outcomes are the die values.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tdleaf/core.hpp"

namespace tdleaf::games {

class DiceRace {
 public:
  static constexpr bool kStochastic = true;
  static constexpr bool kAntisymmetricFeatures = true;

  struct State {
    // progress[player * 2 + token]
    std::array<std::int8_t, 4> progress{};
    std::int8_t to_move = 0;
    std::int8_t roll = 1;
    std::int8_t learner = 0;
    std::int16_t ply = 0;

    friend bool operator==(const State&, const State&) = default;
  };
  using Action = int;

  explicit DiceRace(int track_length = 12, int faces = 3, int ply_cap = 200)
      : track_(track_length), faces_(faces), ply_cap_(ply_cap) {
    if (track_length < 2 || track_length > 100) throw Error("dice race track length out of range");
    if (faces < 1 || faces > 6) throw Error("dice race faces out of range");
    if (ply_cap < 1) throw Error("dice race ply cap must be positive");
  }

  int track_length() const { return track_; }
  int faces() const { return faces_; }
  int ply_cap() const { return ply_cap_; }

  std::string_view id() const { return track_ == 12 && faces_ == 3 ? "dice-race" : "dice-race-short"; }

  std::vector<ChanceEvent> roll_events() const {
    std::vector<ChanceEvent> out;
    for (int v = 1; v <= faces_; ++v) out.push_back({v, 1.0 / faces_});
    return out;
  }

  std::vector<ChanceEvent> opening_events() const { return roll_events(); }

  State initial(Side first_mover, const ChanceEvent& opening) const {
    if (opening.outcome < 1 || opening.outcome > faces_) throw Error("opening roll out of range");
    State s;
    s.learner = first_mover == Side::Learner ? 0 : 1;
    s.roll = static_cast<std::int8_t>(opening.outcome);
    return s;
  }

  bool finished(const State& s, int player) const {
    return s.progress[player * 2] == track_ && s.progress[player * 2 + 1] == track_;
  }

  bool is_terminal(const State& s) const {
    return finished(s, 0) || finished(s, 1) || s.ply >= ply_cap_;
  }

  Side side_to_move(const State& s) const {
    return s.to_move == s.learner ? Side::Learner : Side::Opponent;
  }

  std::vector<Action> legal_actions(const State& s) const {
    std::vector<Action> out;
    if (is_terminal(s)) return out;
    const int p = s.to_move;
    for (int t = 0; t < 2; ++t) {
      if (s.progress[p * 2 + t] == track_) continue;
      if (t == 1 && s.progress[p * 2] == s.progress[p * 2 + 1]) continue;
      out.push_back(t);
    }
    return out;
  }

  // Moves the token and resolves a hit, leaving to_move/roll/ply untouched.
  State advance(const State& s, const Action& a) const {
    State next = s;
    const int p = s.to_move;
    const int q = std::min<int>(s.progress[p * 2 + a] + s.roll, track_);
    next.progress[p * 2 + a] = static_cast<std::int8_t>(q);
    if (q > 0 && q < track_) {
      const int cell = cell_of(p, q);
      const int o = 1 - p;
      int hits = 0, victim = -1;
      for (int t = 0; t < 2; ++t) {
        const int oq = s.progress[o * 2 + t];
        if (oq > 0 && oq < track_ && cell_of(o, oq) == cell) {
          ++hits;
          victim = t;
        }
      }
      if (hits == 1) next.progress[o * 2 + victim] = 0;
    }
    next.ply = static_cast<std::int16_t>(s.ply + 1);
    return next;
  }

  std::vector<ChanceEvent> chance_events(const State& s, const Action& a) const {
    if (is_terminal(advance(s, a))) return {kUnitEvent};
    return roll_events();
  }

  State apply(const State& s, const Action& a, const ChanceEvent& e) const {
    const auto legal = legal_actions(s);
    if (std::find(legal.begin(), legal.end(), a) == legal.end())
      throw Error("illegal action " + action_name(a) + " in state " + serialize(s));
    State next = advance(s, a);
    next.to_move = static_cast<std::int8_t>(1 - s.to_move);
    if (is_terminal(next)) {
      next.roll = 0;
      return next;
    }
    if (e.outcome < 1 || e.outcome > faces_)
      throw Error("chance outcome " + std::to_string(e.outcome) + " impossible after " +
                  action_name(a) + " in state " + serialize(s));
    next.roll = static_cast<std::int8_t>(e.outcome);
    return next;
  }

  Reward terminal_reward(const State& s) const {
    if (!is_terminal(s)) throw Error("reward undefined before termination: " + serialize(s));
    if (finished(s, s.learner)) return 1.0;
    if (finished(s, 1 - s.learner)) return -1.0;
    return 0.0;
  }

  State mirror(const State& s) const {
    State m = s;
    m.learner = static_cast<std::int8_t>(1 - s.learner);
    return m;
  }

  std::size_t feature_count() const { return 4; }

  std::vector<std::string> feature_names() const {
    return {"progress_diff", "home_diff", "exposed_diff", "start_diff"};
  }

  FeatureVector features(const State& s) const {
    FeatureVector f(4, 0.0);
    const int me = s.learner, them = 1 - s.learner;
    for (int t = 0; t < 2; ++t) {
      const int mine = s.progress[me * 2 + t], theirs = s.progress[them * 2 + t];
      f[0] += static_cast<double>(mine - theirs) / track_;
      f[1] += (mine == track_) - (theirs == track_);
      f[2] += exposed(s, me, t) - exposed(s, them, t);
      f[3] += (mine == 0) - (theirs == 0);
    }
    return f;
  }

  std::vector<double> reference_weights() const { return {1.0, 0.2, -0.15, -0.05}; }

  std::string serialize(const State& s) const {
    const auto& p = s.progress;
    return std::to_string(p[0]) + "," + std::to_string(p[1]) + "|" + std::to_string(p[2]) + "," +
           std::to_string(p[3]) + ":" + std::to_string(s.to_move) + ":" + std::to_string(s.roll) +
           ":" + std::to_string(s.learner) + ":" + std::to_string(s.ply);
  }

  State parse(std::string_view text) const {
    const auto bad = [&] { return Error("malformed dice-race state '" + std::string(text) + "'"); };
    std::array<int, 8> v{};
    const char seps[8] = {',', '|', ',', ':', ':', ':', ':', '\0'};
    const char* cur = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 8; ++i) {
      const auto [next, ec] = std::from_chars(cur, end, v[i]);
      if (ec != std::errc()) throw bad();
      cur = next;
      if (i < 7) {
        if (cur == end || *cur != seps[i]) throw bad();
        ++cur;
      }
    }
    if (cur != end) throw bad();
    State s;
    for (int i = 0; i < 4; ++i) {
      if (v[i] < 0 || v[i] > track_) throw bad();
      s.progress[i] = static_cast<std::int8_t>(v[i]);
    }
    if ((v[4] != 0 && v[4] != 1) || v[5] < 0 || v[5] > faces_ || (v[6] != 0 && v[6] != 1) ||
        v[7] < 0 || v[7] > ply_cap_)
      throw bad();
    s.to_move = static_cast<std::int8_t>(v[4]);
    s.roll = static_cast<std::int8_t>(v[5]);
    s.learner = static_cast<std::int8_t>(v[6]);
    s.ply = static_cast<std::int16_t>(v[7]);
    if (!is_terminal(s) && s.roll == 0) throw bad();
    return s;
  }

  std::string action_name(const Action& a) const { return "t" + std::to_string(a); }

  Action parse_action(const State& s, std::string_view text) const {
    for (Action a : legal_actions(s))
      if (action_name(a) == text) return a;
    throw Error("illegal action '" + std::string(text) + "' in state " + serialize(s));
  }

 private:
  int cell_of(int player, int progress) const { return player == 0 ? progress : track_ - progress; }

  // Alone on a shared cell with an opposing token within one roll behind it.
  double exposed(const State& s, int player, int token) const {
    const int q = s.progress[player * 2 + token];
    if (q <= 0 || q >= track_) return 0.0;
    if (s.progress[player * 2 + (1 - token)] == q) return 0.0;
    const int cell = cell_of(player, q);
    const int o = 1 - player;
    for (int t = 0; t < 2; ++t) {
      const int oq = s.progress[o * 2 + t];
      if (oq >= track_) continue;
      const int distance = o == 0 ? cell - cell_of(o, oq) : cell_of(o, oq) - cell;
      if (distance >= 1 && distance <= faces_) return 1.0;
    }
    return 0.0;
  }

  int track_;
  int faces_;
  int ply_cap_;
};

}  // namespace tdleaf::games
