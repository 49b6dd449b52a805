// Core vocabulary shared by every game, search routine and learner.
//
// A game is a plain value type exposing pure const member functions over its
// own State and Action types. Values and features are always expressed from
// the Learner's fixed perspective; the side to move is tracked separately so
// that Learner nodes maximize and Opponent nodes minimize.

#pragma once

#include <cstdint>
#include <cstdio>
#include <concepts>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tdleaf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Side : std::uint8_t { Learner, Opponent };

constexpr Side other(Side s) { return s == Side::Learner ? Side::Opponent : Side::Learner; }

inline std::string_view to_string(Side s) { return s == Side::Learner ? "learner" : "opponent"; }

// +1 learner win, -1 learner loss, 0 draw.
using Reward = double;

using FeatureVector = std::vector<double>;

struct ChanceEvent {
  int outcome = 0;
  double probability = 1.0;

  friend bool operator==(const ChanceEvent&, const ChanceEvent&) = default;
};

// The single outcome of a deterministic transition.
inline constexpr ChanceEvent kUnitEvent{0, 1.0};

// One ply: the chosen action plus the chance outcome that followed it.
template <typename Action>
struct Move {
  Action action{};
  ChanceEvent event = kUnitEvent;

  friend bool operator==(const Move&, const Move&) = default;
};

template <typename G>
concept Game = requires(const G& g, const typename G::State& s, const typename G::Action& a,
                        const ChanceEvent& e) {
  typename G::State;
  typename G::Action;
  { g.legal_actions(s) } -> std::same_as<std::vector<typename G::Action>>;
  { g.chance_events(s, a) } -> std::same_as<std::vector<ChanceEvent>>;
  { g.apply(s, a, e) } -> std::same_as<typename G::State>;
  { g.is_terminal(s) } -> std::convertible_to<bool>;
  { g.side_to_move(s) } -> std::same_as<Side>;
  { g.terminal_reward(s) } -> std::convertible_to<Reward>;
  { g.features(s) } -> std::same_as<FeatureVector>;
  { g.feature_count() } -> std::convertible_to<std::size_t>;
  { g.serialize(s) } -> std::same_as<std::string>;
  { g.action_name(a) } -> std::same_as<std::string>;
};

// Games that can be played end to end by the harness: they have an initial
// position, a textual round trip, and a role swap (`mirror`) that hands the
// Learner seat to the other player without changing the position.
template <typename G>
concept PlayableGame =
    Game<G> && requires(const G& g, const typename G::State& s, std::string_view text, Side side,
                        const ChanceEvent& e) {
      { g.id() } -> std::convertible_to<std::string_view>;
      { g.opening_events() } -> std::same_as<std::vector<ChanceEvent>>;
      { g.initial(side, e) } -> std::same_as<typename G::State>;
      { g.mirror(s) } -> std::same_as<typename G::State>;
      { g.parse(text) } -> std::same_as<typename G::State>;
      { g.parse_action(s, text) } -> std::same_as<typename G::Action>;
      { g.feature_names() } -> std::same_as<std::vector<std::string>>;
      { g.reference_weights() } -> std::same_as<std::vector<double>>;
      { G::kStochastic } -> std::convertible_to<bool>;
      { G::kAntisymmetricFeatures } -> std::convertible_to<bool>;
    };

// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// FNV-1a over the serialized state; stable across platforms and runs.
inline std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string event_name(const ChanceEvent& e) { return "~" + std::to_string(e.outcome); }

template <typename G>
std::string move_name(const G& game, const Move<typename G::Action>& m) {
  std::string name = game.action_name(m.action);
  if (!(m.event == kUnitEvent)) name += event_name(m.event);
  return name;
}

}  // namespace tdleaf
