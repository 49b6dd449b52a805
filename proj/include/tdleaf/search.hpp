// Fixed-depth game-tree search returning the backed-up value J_d(x, w), the
// principal variation, its leaf and the gradient of the backed-up value.
//
// Values are always from the Learner's perspective: Learner nodes maximize,
// Opponent nodes minimize, chance nodes average. Children are searched in
// the game's canonical action order and an incumbent is replaced only on
// strict improvement, so among tied moves the first one wins. Terminal
// nodes score their reward at any remaining depth.

#pragma once

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "tdleaf/core.hpp"
#include "tdleaf/eval.hpp"

namespace tdleaf {

enum class Pruning { None, AlphaBeta };
enum class ChanceHandling { Forbid, Expectiminimax };

struct SearchConfig {
  int depth = 1;
  Pruning pruning = Pruning::AlphaBeta;
  ChanceHandling chance = ChanceHandling::Forbid;
  SquashConfig squash;

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

template <Game G>
struct SearchResult {
  using State = typename G::State;
  using Action = typename G::Action;

  double value = 0.0;
  std::vector<Move<Action>> pv;
  State leaf{};
  std::vector<double> leaf_gradient;
  std::size_t nodes_visited = 0;
  int depth = 0;
};

namespace detail {

// Trace lines are written post-order, once a node's value is known:
//   depth=<remaining plies> hash=<fnv1a-64 of state, 16 hex> alpha=<a> beta=<b> value=<v>
// alpha/beta are the window on entry (+-inf when unpruned).
inline void trace_node(std::ostream* out, int depth, std::uint64_t hash, double alpha, double beta,
                       double value) {
  if (!out) return;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
  *out << "depth=" << depth << " hash=" << buf << " alpha=" << format_double(alpha)
       << " beta=" << format_double(beta) << " value=" << format_double(value) << "\n";
}

template <Game G>
class Searcher {
 public:
  using State = typename G::State;
  using Action = typename G::Action;

  Searcher(const G& game, const ParamVector& w, const SearchConfig& cfg, std::ostream* trace)
      : game_(game), w_(w), cfg_(cfg), trace_(trace) {}

  // pv is stored leaf-first while unwinding and reversed once at the root.
  struct Line {
    double value = 0.0;
    std::vector<Move<Action>> pv;
    State leaf{};
    std::vector<double> gradient;
  };

  Line minimax(const State& s, int depth, double alpha, double beta, bool prune) {
    ++nodes_;
    const double alpha0 = alpha, beta0 = beta;
    if (game_.is_terminal(s) || depth == 0) {
      Line leaf{evaluate(game_, s, w_, cfg_.squash).value, {}, s, {}};
      trace(s, depth, alpha0, beta0, leaf.value);
      return leaf;
    }
    const bool maximizing = game_.side_to_move(s) == Side::Learner;
    std::optional<Line> best;
    for (const Action& a : game_.legal_actions(s)) {
      const auto events = game_.chance_events(s, a);
      if (events.size() != 1 || events.front().probability != 1.0)
        throw Error("chance node at " + game_.serialize(s) + " with chance handling 'forbid'");
      Line r = minimax(game_.apply(s, a, events.front()), depth - 1, alpha, beta, prune);
      if (!best || (maximizing ? r.value > best->value : r.value < best->value)) {
        r.pv.push_back({a, events.front()});
        best = std::move(r);
      }
      if (prune) {
        if (maximizing)
          alpha = std::max(alpha, best->value);
        else
          beta = std::min(beta, best->value);
        if (alpha >= beta) break;
      }
    }
    trace(s, depth, alpha0, beta0, best->value);
    return std::move(*best);
  }

  Line expectiminimax(const State& s, int depth) {
    ++nodes_;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (game_.is_terminal(s) || depth == 0) {
      auto e = evaluate(game_, s, w_, cfg_.squash);
      Line leaf{e.value, {}, s, std::move(e.gradient)};
      trace(s, depth, -kInf, kInf, leaf.value);
      return leaf;
    }
    const bool maximizing = game_.side_to_move(s) == Side::Learner;
    std::optional<Line> best;
    for (const Action& a : game_.legal_actions(s)) {
      const auto events = game_.chance_events(s, a);
      double total = 0.0;
      for (const auto& e : events) {
        if (!(e.probability > 0.0 && e.probability <= 1.0))
          throw Error("chance probability outside (0,1] at " + game_.serialize(s));
        total += e.probability;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw Error("chance probabilities sum to " + format_double(total) + " at " + game_.serialize(s));

      // Mean value and gradient; PV follows the most probable outcome,
      // first in canonical order on ties.
      Line q{0.0, {}, s, std::vector<double>(w_.size(), 0.0)};
      std::optional<Line> principal;
      ChanceEvent principal_event{};
      for (const auto& e : events) {
        Line r = expectiminimax(game_.apply(s, a, e), depth - 1);
        q.value += e.probability * r.value;
        for (std::size_t i = 0; i < q.gradient.size(); ++i) q.gradient[i] += e.probability * r.gradient[i];
        if (!principal || e.probability > principal_event.probability) {
          principal = std::move(r);
          principal_event = e;
        }
      }
      if (!best || (maximizing ? q.value > best->value : q.value < best->value)) {
        q.pv = std::move(principal->pv);
        q.pv.push_back({a, principal_event});
        q.leaf = std::move(principal->leaf);
        best = std::move(q);
      }
    }
    trace(s, depth, -kInf, kInf, best->value);
    return std::move(*best);
  }

  std::size_t nodes() const { return nodes_; }

 private:
  void trace(const State& s, int depth, double alpha, double beta, double value) {
    if (trace_) trace_node(trace_, depth, stable_hash(game_.serialize(s)), alpha, beta, value);
  }

  const G& game_;
  const ParamVector& w_;
  const SearchConfig& cfg_;
  std::ostream* trace_;
  std::size_t nodes_ = 0;
};

template <Game G>
SearchResult<G> deterministic_search(const G& game, const typename G::State& state,
                                     const ParamVector& w, const SearchConfig& cfg, bool prune,
                                     std::ostream* trace) {
  if (cfg.depth < 0) throw Error("search depth must be >= 0");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Searcher<G> searcher(game, w, cfg, trace);
  auto line = searcher.minimax(state, cfg.depth, -kInf, kInf, prune);
  std::reverse(line.pv.begin(), line.pv.end());
  SearchResult<G> out;
  out.value = line.value;
  out.pv = std::move(line.pv);
  out.leaf_gradient = evaluate(game, line.leaf, w, cfg.squash).gradient;
  out.leaf = std::move(line.leaf);
  out.nodes_visited = searcher.nodes();
  out.depth = cfg.depth;
  return out;
}

}  // namespace detail

// Exhaustive depth-d minimax without pruning.
template <Game G>
SearchResult<G> minimax(const G& game, const typename G::State& state, const ParamVector& w,
                        const SearchConfig& cfg, std::ostream* trace = nullptr) {
  return detail::deterministic_search(game, state, w, cfg, false, trace);
}

// Fail-soft alpha-beta. Returns the same value, PV and leaf as minimax.
template <Game G>
SearchResult<G> alphabeta(const G& game, const typename G::State& state, const ParamVector& w,
                          const SearchConfig& cfg, std::ostream* trace = nullptr) {
  return detail::deterministic_search(game, state, w, cfg, true, trace);
}

// Chance nodes take the probability-weighted mean of their children; the
// gradient is the same weighted combination of the leaf gradients beneath
// the chosen moves. No pruning is applied.
template <Game G>
SearchResult<G> expectiminimax(const G& game, const typename G::State& state, const ParamVector& w,
                               const SearchConfig& cfg, std::ostream* trace = nullptr) {
  if (cfg.depth < 0) throw Error("search depth must be >= 0");
  detail::Searcher<G> searcher(game, w, cfg, trace);
  auto line = searcher.expectiminimax(state, cfg.depth);
  std::reverse(line.pv.begin(), line.pv.end());
  SearchResult<G> out;
  out.value = line.value;
  out.pv = std::move(line.pv);
  out.leaf = std::move(line.leaf);
  out.leaf_gradient = std::move(line.gradient);
  out.nodes_visited = searcher.nodes();
  out.depth = cfg.depth;
  return out;
}

template <Game G>
SearchResult<G> search(const G& game, const typename G::State& state, const ParamVector& w,
                       const SearchConfig& cfg, std::ostream* trace = nullptr) {
  if (cfg.chance == ChanceHandling::Expectiminimax) return expectiminimax(game, state, w, cfg, trace);
  if (cfg.pruning == Pruning::AlphaBeta) return alphabeta(game, state, w, cfg, trace);
  return minimax(game, state, w, cfg, trace);
}

// First move of the principal variation (depth 0 is searched as depth 1).
// With probability epsilon a uniformly random legal action is taken instead;
// rng is only consumed when epsilon > 0.
template <Game G, typename Rng>
typename G::Action select_action(const G& game, const typename G::State& state, const ParamVector& w,
                                 const SearchConfig& cfg, double epsilon, Rng& rng) {
  if (game.is_terminal(state)) throw Error("select_action on terminal state " + game.serialize(state));
  const auto actions = game.legal_actions(state);
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
      return actions[pick(rng)];
    }
  }
  if (actions.size() == 1) return actions.front();
  SearchConfig c = cfg;
  c.depth = std::max(1, cfg.depth);
  return search(game, state, w, c).pv.front().action;
}

template <Game G>
typename G::Action select_action(const G& game, const typename G::State& state, const ParamVector& w,
                                 const SearchConfig& cfg) {
  std::mt19937_64 unused(0);
  return select_action(game, state, w, cfg, 0.0, unused);
}

}  // namespace tdleaf
