// Exact game-theoretic values J*(x) by full-depth (expecti)minimax with
// memoization, for games small enough to enumerate.

#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdleaf/core.hpp"

namespace tdleaf {

template <Game G>
class ExactSolver {
 public:
  using State = typename G::State;
  using Action = typename G::Action;

  static constexpr std::size_t kDefaultCap = 5'000'000;

  explicit ExactSolver(G game, std::size_t state_cap = kDefaultCap)
      : game_(std::move(game)), cap_(state_cap) {}

  const G& game() const { return game_; }

  // Learner-perspective value under optimal play by both sides.
  double value(const State& s) {
    std::lock_guard lock(mu_);
    return solve(s);
  }

  // Expected value of playing `a` in `s`, averaged over chance outcomes.
  double action_value(const State& s, const Action& a) {
    std::lock_guard lock(mu_);
    return q_value(s, a);
  }

  // First optimal action in canonical order.
  Action best_action(const State& s) {
    std::lock_guard lock(mu_);
    const auto actions = game_.legal_actions(s);
    if (actions.empty()) throw Error("best_action on terminal state " + game_.serialize(s));
    const bool maximizing = game_.side_to_move(s) == Side::Learner;
    std::optional<double> best;
    Action choice = actions.front();
    for (const Action& a : actions) {
      const double q = q_value(s, a);
      if (!best || (maximizing ? q > *best : q < *best)) {
        best = q;
        choice = a;
      }
    }
    return choice;
  }

  std::size_t states_solved() const {
    std::lock_guard lock(mu_);
    return memo_.size();
  }

 private:
  double q_value(const State& s, const Action& a) {
    double q = 0.0;
    for (const auto& e : game_.chance_events(s, a)) q += e.probability * solve(game_.apply(s, a, e));
    return q;
  }

  double solve(const State& s) {
    if (game_.is_terminal(s)) return game_.terminal_reward(s);
    auto key = game_.serialize(s);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= cap_)
      throw Error("exact solve exceeded the state-space cap of " + std::to_string(cap_) + " states");
    const bool maximizing = game_.side_to_move(s) == Side::Learner;
    std::optional<double> best;
    for (const Action& a : game_.legal_actions(s)) {
      const double q = q_value(s, a);
      if (!best || (maximizing ? q > *best : q < *best)) best = q;
    }
    memo_.emplace(std::move(key), *best);
    return *best;
  }

  G game_;
  std::size_t cap_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, double> memo_;
};

// One-shot convenience wrapper.
template <Game G>
double solve_exact(const G& game, const typename G::State& state,
                   std::size_t state_cap = ExactSolver<G>::kDefaultCap) {
  ExactSolver<G> solver(game, state_cap);
  return solver.value(state);
}

}  // namespace tdleaf
