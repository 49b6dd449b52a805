// Independent reference computations used to verify the search and learning
// code: plain recursions without pruning or PV bookkeeping, direct double
// sums, and finite differences. Nothing here calls into search.hpp or the TD
// recurrences.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tdleaf/core.hpp"
#include "tdleaf/eval.hpp"

namespace tdleaf::oracle {

// Plain negamax. Returns the value from the Learner's perspective and the
// serialized leaf of the first best line.
template <Game G>
std::pair<double, std::string> negamax(const G& game, const typename G::State& s, const ParamVector& w,
                                       const SquashConfig& squash, int depth) {
  const double sign = game.side_to_move(s) == Side::Learner ? 1.0 : -1.0;
  if (game.is_terminal(s) || depth == 0) {
    const double v = game.is_terminal(s) ? static_cast<double>(game.terminal_reward(s))
                                         : evaluate(game, s, w, squash).value;
    return {v, game.serialize(s)};
  }
  bool first = true;
  double best = 0.0;
  std::string leaf;
  for (const auto& a : game.legal_actions(s)) {
    const auto child = game.apply(s, a, kUnitEvent);
    auto [v, l] = negamax(game, child, w, squash, depth - 1);
    const double mine = sign * v;
    if (first || mine > best) {
      best = mine;
      leaf = std::move(l);
      first = false;
    }
  }
  return {sign * best, leaf};
}

// Brute-force expectimax value.
template <Game G>
double expectimax(const G& game, const typename G::State& s, const ParamVector& w, const SquashConfig& squash,
                  int depth) {
  if (game.is_terminal(s)) return game.terminal_reward(s);
  if (depth == 0) return evaluate(game, s, w, squash).value;
  const bool learner = game.side_to_move(s) == Side::Learner;
  double best = learner ? -INFINITY : INFINITY;
  for (const auto& a : game.legal_actions(s)) {
    double mean = 0.0;
    for (const auto& e : game.chance_events(s, a))
      mean += e.probability * expectimax(game, game.apply(s, a, e), w, squash, depth - 1);
    best = learner ? std::max(best, mean) : std::min(best, mean);
  }
  return best;
}

// Central differences of an arbitrary scalar function of the weights.
template <typename F>
std::vector<double> finite_difference_gradient(F&& f, const ParamVector& w, double step) {
  std::vector<double> g(w.size());
  ParamVector probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    probe.values[i] = w[i] + step;
    const double up = f(probe);
    probe.values[i] = w[i] - step;
    const double down = f(probe);
    probe.values[i] = w[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// sum_{j>=t} lambda^(j-t) d_j, term by term.
inline std::vector<double> direct_lambda_sum(const std::vector<double>& d, double lambda) {
  std::vector<double> out(d.size(), 0.0);
  for (std::size_t t = 0; t < d.size(); ++t)
    for (std::size_t j = t; j < d.size(); ++j) out[t] += std::pow(lambda, static_cast<double>(j - t)) * d[j];
  return out;
}

// alpha * sum_t grad_t * sum_{j>=t} lambda^(j-t) (v_{j+1} - v_j), with
// v_N = reward, evaluated as the literal double sum.
inline std::vector<double> direct_td_update(const std::vector<double>& values,
                                            const std::vector<std::vector<double>>& gradients, double reward,
                                            double lambda, double alpha) {
  const std::size_t n = values.size();
  const std::size_t k = gradients.empty() ? 0 : gradients.front().size();
  std::vector<double> delta(k, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 0.0;
    for (std::size_t j = t; j < n; ++j) {
      const double next = j + 1 < n ? values[j + 1] : reward;
      weight += std::pow(lambda, static_cast<double>(j - t)) * (next - values[j]);
    }
    for (std::size_t i = 0; i < k; ++i) delta[i] += alpha * gradients[t][i] * weight;
  }
  return delta;
}

// E(w) = sum_t (r - J(x_t, w))^2 over fixed root positions.
template <Game G>
double squared_error(const G& game, const std::vector<typename G::State>& positions, double reward,
                     const ParamVector& w, const SquashConfig& squash) {
  double e = 0.0;
  for (const auto& s : positions) {
    const double diff = reward - evaluate(game, s, w, squash).value;
    e += diff * diff;
  }
  return e;
}

}  // namespace tdleaf::oracle
