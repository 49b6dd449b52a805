// Property suites shared by the command-line `verify` command and the test
// binaries. Each check reports pass/fail plus the measured quantity.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tdleaf/core.hpp"
#include "tdleaf/eval.hpp"
#include "tdleaf/games/connect4.hpp"
#include "tdleaf/games/dice_race.hpp"
#include "tdleaf/games/explicit_tree.hpp"
#include "tdleaf/games/minichess.hpp"
#include "tdleaf/games/tictactoe.hpp"
#include "tdleaf/harness.hpp"
#include "tdleaf/oracles.hpp"
#include "tdleaf/search.hpp"
#include "tdleaf/td.hpp"

namespace tdleaf::verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::vector<Check> checks;
  std::vector<std::string> warnings;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  void add(std::string name, bool ok, std::string detail = {}) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }
};

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, rel_error(a[i], b[i]));
  return worst;
}

inline ParamVector random_weights(std::size_t k, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> w(k);
  for (auto& x : w) x = u(rng);
  return ParamVector(std::move(w));
}

// ---------------------------------------------------------------- figure 1

inline SuiteReport figure1() {
  SuiteReport r;
  const auto tree = games::figure1_tree();
  const ParamVector w(games::figure1_leaf_scores());
  SearchConfig cfg;
  cfg.depth = 3;
  cfg.pruning = Pruning::None;
  const auto mm = minimax(tree, 0, w, cfg);
  cfg.pruning = Pruning::AlphaBeta;
  const auto ab = alphabeta(tree, 0, w, cfg);

  std::string pv;
  for (const auto& m : mm.pv) pv += (pv.empty() ? "" : " ") + tree.action_name(m.action);
  const auto leaf = tree.find("L");
  const auto leaf_eval = evaluate(tree, leaf, w);
  std::vector<double> unit(8, 0.0);
  unit[4] = 1.0;

  r.add("root value is 4", mm.value == 4.0, "value=" + format_double(mm.value));
  r.add("principal variation A>C>F>L", pv == "A>C C>F F>L", "pv=" + pv);
  r.add("PV leaf is L", mm.leaf == leaf, "leaf=" + tree.serialize(mm.leaf));
  r.add("root value equals leaf evaluation", mm.value == leaf_eval.value);
  r.add("root gradient equals leaf-L gradient", mm.leaf_gradient == leaf_eval.gradient && mm.leaf_gradient == unit);
  r.add("alpha-beta reproduces value, PV and leaf", ab.value == mm.value && ab.pv == mm.pv && ab.leaf == mm.leaf,
        "nodes minimax=" + std::to_string(mm.nodes_visited) + " alphabeta=" + std::to_string(ab.nodes_visited));
  r.add("alpha-beta visits no more nodes", ab.nodes_visited <= mm.nodes_visited);
  const auto chosen = select_action(tree, 0, w, cfg);
  r.add("selected move is A>C", tree.action_name(chosen) == "A>C", "move=" + tree.action_name(chosen));
  return r;
}

// --------------------------------------------------------------- gradients

struct GradStats {
  double eval_error = 0.0;
  double search_error = 0.0;
  std::size_t eval_pairs = 0;
  std::size_t search_pairs = 0;
  std::size_t ties = 0;
  std::size_t flat = 0;
};

// Analytic evaluation gradients against central differences, and search
// gradients against central differences of the search value on pairs whose
// PV leaf is unchanged by every probe (pairs on a tie are resampled). Under
// chance nodes a switch in a non-principal branch leaves the PV alone but
// moves the gradient, so a gradient jump between probes also counts as a tie.
template <PlayableGame G>
GradStats gradient_stats(const G& game, std::size_t samples, std::uint64_t seed, int max_depth) {
  GradStats st;
  std::mt19937_64 rng(derive_seed(seed, 10, 0));
  const SquashConfig squash{true, kDefaultBeta};
  constexpr double kStep = 1e-6;
  const auto positions = sample_positions(game, 4 * samples, seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto w = random_weights(game.feature_count(), rng);
    st.eval_error = std::max(st.eval_error, grad_check(game, positions[i], w, squash, kStep));
    ++st.eval_pairs;
  }

  // Positions are drawn until `samples` screened pairs are collected.
  for (std::size_t i = 0; i < positions.size() && st.search_pairs < samples; ++i) {
    const auto cfg = default_search<G>(1 + static_cast<int>(i % max_depth), squash);
    for (int attempt = 0; attempt < 3; ++attempt) {
      const auto w = random_weights(game.feature_count(), rng);
      const auto base = search(game, positions[i], w, cfg);
      bool tie = false;
      const auto numeric = oracle::finite_difference_gradient(
          [&](const ParamVector& p) {
            const auto res = search(game, positions[i], p, cfg);
            tie |= game.serialize(res.leaf) != game.serialize(base.leaf) ||
                   max_rel_error(res.leaf_gradient, base.leaf_gradient) > 1e-4;
            return res.value;
          },
          w, kStep);
      // Forced results and exact cancellations leave a gradient at rounding
      // level; comparing it against the 1e-8 floor only measures noise.
      const bool flat = std::all_of(base.leaf_gradient.begin(), base.leaf_gradient.end(),
                                    [](double g) { return std::abs(g) < 1e-12; });
      if (tie || flat) {
        ++(tie ? st.ties : st.flat);
        continue;
      }
      st.search_error = std::max(st.search_error, max_rel_error(base.leaf_gradient, numeric));
      ++st.search_pairs;
      break;
    }
  }
  return st;
}

inline SuiteReport gradcheck(std::size_t samples, std::uint64_t seed) {
  SuiteReport r;
  auto one = [&](const auto& game, int max_depth) {
    const auto st = gradient_stats(game, samples, seed, max_depth);
    const std::string id(game.id());
    r.add(id + ": evaluation gradient within 1e-6", st.eval_error <= 1e-6,
          "max rel error " + format_double(st.eval_error) + " over " + std::to_string(st.eval_pairs) + " pairs");
    r.add(id + ": search gradient within 1e-5", st.search_error <= 1e-5 && st.search_pairs == samples,
          "max rel error " + format_double(st.search_error) + " over " + std::to_string(st.search_pairs) +
              " pairs; screened out " + std::to_string(st.ties) + " ties and " + std::to_string(st.flat) +
              " flat gradients");
  };
  one(games::TicTacToe{}, 3);
  one(games::Connect4{}, 3);
  one(games::Minichess{}, 2);
  one(games::DiceRace{}, 2);
  return r;
}

// ----------------------------------------------------------- search oracle

struct SearchOracleStats {
  std::size_t positions = 0;
  std::size_t mismatches = 0;  // alpha-beta vs minimax (value, PV, leaf)
  std::size_t oracle_mismatches = 0;  // minimax vs plain negamax (value, leaf)
  std::size_t deep_positions = 0;
  std::size_t deep_fewer_nodes = 0;
  std::size_t ab_more_nodes = 0;
};

// Height of the full-width tree below s, capped at depth.
template <Game G>
int tree_height(const G& game, const typename G::State& s, int depth) {
  if (depth == 0 || game.is_terminal(s)) return 0;
  int h = 0;
  for (const auto& a : game.legal_actions(s)) {
    h = std::max(h, 1 + tree_height(game, game.apply(s, a, kUnitEvent), depth - 1));
    if (h == depth) break;
  }
  return h;
}

// Depths cycle through 1..max_depth across the sampled positions. A search
// counts as depth-4+ when its tree actually reaches four plies; near the end
// of a game a nominal depth-6 search may be a single forced line.
template <PlayableGame G>
SearchOracleStats search_oracle_stats(const G& game, std::size_t count, std::uint64_t seed, int max_depth,
                                      bool negamax_check = true) {
  SearchOracleStats st;
  std::mt19937_64 rng(derive_seed(seed, 11, 0));
  const auto positions = sample_positions(game, count, seed);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto w = random_weights(game.feature_count(), rng);
    const SquashConfig squash{i % 2 == 0, kDefaultBeta};
    auto cfg = default_search<G>(1 + static_cast<int>(i % max_depth), squash);
    cfg.pruning = Pruning::None;
    const auto mm = minimax(game, positions[i], w, cfg);
    cfg.pruning = Pruning::AlphaBeta;
    const auto ab = alphabeta(game, positions[i], w, cfg);
    ++st.positions;
    if (!(ab.value == mm.value && ab.pv == mm.pv && ab.leaf == mm.leaf)) ++st.mismatches;
    if (negamax_check) {
      const auto [ov, oleaf] = oracle::negamax(game, positions[i], w, squash, cfg.depth);
      if (!(ov == mm.value && oleaf == game.serialize(mm.leaf))) ++st.oracle_mismatches;
    }
    if (ab.nodes_visited > mm.nodes_visited) ++st.ab_more_nodes;
    if (cfg.depth >= 4 && tree_height(game, positions[i], cfg.depth) >= 4) {
      ++st.deep_positions;
      if (ab.nodes_visited < mm.nodes_visited) ++st.deep_fewer_nodes;
    }
  }
  return st;
}

struct ExpectimaxOracleStats {
  std::size_t positions = 0;
  double max_error = 0.0;
};

inline ExpectimaxOracleStats expectimax_oracle_stats(const games::DiceRace& game, std::size_t count,
                                                     std::uint64_t seed, int depth = 2) {
  ExpectimaxOracleStats st;
  std::mt19937_64 rng(derive_seed(seed, 12, 0));
  const auto positions = sample_positions(game, count, seed);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto w = random_weights(game.feature_count(), rng);
    const SquashConfig squash{i % 2 == 0, kDefaultBeta};
    const auto cfg = default_search<games::DiceRace>(depth, squash);
    const double got = expectiminimax(game, positions[i], w, cfg).value;
    const double want = oracle::expectimax(game, positions[i], w, squash, depth);
    st.max_error = std::max(st.max_error, std::abs(got - want));
    ++st.positions;
  }
  return st;
}

inline SuiteReport search_oracle(std::size_t count, std::uint64_t seed, int max_depth = 6) {
  SuiteReport r;
  if (count == 0) {
    r.warnings.push_back("search-oracle ran on 0 positions; all properties hold vacuously");
    r.add("no positions requested", true);
    return r;
  }
  auto one = [&](const auto& game) {
    const std::string id(game.id());
    const int depth = max_depth;
    const auto st = search_oracle_stats(game, count, seed, depth);
    r.add(id + ": alpha-beta equals minimax (value, PV, leaf)", st.mismatches == 0,
          std::to_string(st.mismatches) + " mismatches over " + std::to_string(st.positions) + " positions, depths 1-" +
              std::to_string(depth));
    r.add(id + ": minimax equals plain negamax (value, leaf)", st.oracle_mismatches == 0,
          std::to_string(st.oracle_mismatches) + " mismatches");
    r.add(id + ": alpha-beta never visits more nodes", st.ab_more_nodes == 0);
    const double frac = st.deep_positions ? static_cast<double>(st.deep_fewer_nodes) / st.deep_positions : 1.0;
    r.add(id + ": alpha-beta strictly fewer nodes on >= 90% of depth-4+ searches", frac >= 0.9,
          format_double(frac) + " of " + std::to_string(st.deep_positions));
  };
  one(games::TicTacToe{});
  one(games::Connect4{});
  one(games::Minichess{});
  const auto ex = expectimax_oracle_stats(games::DiceRace{}, std::max<std::size_t>(1, count / 2), seed);
  r.add("dice-race: expectiminimax equals brute-force expectimax within 1e-12", ex.max_error <= 1e-12,
        "max abs error " + format_double(ex.max_error) + " over " + std::to_string(ex.positions) + " positions");
  return r;
}

// --------------------------------------------------------------- TD oracle

struct SyntheticTrajectory {
  std::vector<double> values;
  std::vector<std::vector<double>> gradients;
  double reward = 0.0;
};

// Values on a 1/64 grid and gradients on a 1/8 grid: every sum and product
// in the update is exact in double precision.
inline SyntheticTrajectory dyadic_trajectory(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::uniform_int_distribution<int> v(-64, 64), g(-16, 16), r(-1, 1);
  SyntheticTrajectory t;
  for (std::size_t i = 0; i < n; ++i) {
    t.values.push_back(v(rng) / 64.0);
    std::vector<double> grad(k);
    for (auto& x : grad) x = g(rng) / 8.0;
    t.gradients.push_back(std::move(grad));
  }
  t.reward = r(rng);
  return t;
}

template <Game G>
GameTrajectory<G> as_trajectory(const SyntheticTrajectory& s) {
  GameTrajectory<G> traj;
  for (std::size_t t = 0; t < s.values.size(); ++t) {
    TrajectoryRecord<G> rec;
    rec.move_index = 2 * t;
    rec.root_eval = {s.values[t], s.gradients[t]};
    SearchResult<G> sr;
    sr.value = s.values[t];
    sr.leaf_gradient = s.gradients[t];
    rec.search = sr;
    traj.records.push_back(std::move(rec));
  }
  traj.reward = s.reward;
  return traj;
}

// lambda = 0 closed form: alpha * sum_t grad_t (v_{t+1} - v_t).
inline std::vector<double> td0_closed_form(const std::vector<double>& values,
                                           const std::vector<std::vector<double>>& grads, double reward,
                                           double alpha) {
  std::vector<double> out(grads.front().size(), 0.0);
  for (std::size_t t = 0; t < values.size(); ++t) {
    const double next = t + 1 < values.size() ? values[t + 1] : reward;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += grads[t][i] * (next - values[t]);
  }
  for (auto& x : out) x *= alpha;
  return out;
}

// lambda = 1 closed form: alpha * sum_t grad_t (r - v_t).
inline std::vector<double> td1_closed_form(const std::vector<double>& values,
                                           const std::vector<std::vector<double>>& grads, double reward,
                                           double alpha) {
  std::vector<double> out(grads.front().size(), 0.0);
  for (std::size_t t = 0; t < values.size(); ++t)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += grads[t][i] * (reward - values[t]);
  for (auto& x : out) x *= alpha;
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Plays tic-tac-toe games with a learning depth-d searcher (squash on) and
// returns the learner's trajectories.
inline std::vector<GameTrajectory<games::TicTacToe>> sample_trajectories(std::size_t count, int depth,
                                                                         std::uint64_t seed) {
  using games::TicTacToe;
  const TicTacToe game;
  std::mt19937_64 rng(derive_seed(seed, 13, 0));
  std::vector<GameTrajectory<TicTacToe>> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto learner = search_agent<TicTacToe>("learner", random_weights(4, rng), default_search<TicTacToe>(depth, {true, kDefaultBeta}),
                                           0.2, true);
    const auto opponent = random_agent<TicTacToe>();
    auto rec = play_game(game, learner, opponent, i % 2 == 0, derive_seed(seed, 0, i), derive_seed(seed, 1, i));
    out.push_back(std::move(*rec.trajectory_a));
  }
  return out;
}

inline SuiteReport td_oracle(std::uint64_t seed) {
  using games::TicTacToe;
  SuiteReport r;
  std::mt19937_64 rng(derive_seed(seed, 14, 0));

  {
    double worst = 0.0;
    std::uniform_real_distribution<double> u(-1.0, 1.0), lam(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, 40);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> d(len(rng));
      for (auto& x : d) x = u(rng);
      const double l = trial == 0 ? 0.0 : trial == 1 ? 1.0 : lam(rng);
      worst = std::max(worst, max_abs_diff(lambda_sum(d, l), oracle::direct_lambda_sum(d, l)));
    }
    r.add("lambda_sum recurrence equals direct double sum within 1e-12", worst <= 1e-12,
          "max abs diff " + format_double(worst));
  }

  const ParamVector w4(std::vector<double>(4, 0.0));
  {
    bool exact0 = true, exact1 = true;
    for (int trial = 0; trial < 200; ++trial) {
      const auto syn = dyadic_trajectory(rng, 1 + trial % 12, 4);
      const auto traj = as_trajectory<TicTacToe>(syn);
      UpdateConfig cfg;
      cfg.algorithm = Algorithm::TD;
      cfg.alpha = 0.5;
      cfg.lambda = 0.0;
      exact0 &= td_update(traj, w4, cfg).delta == td0_closed_form(syn.values, syn.gradients, syn.reward, 0.5);
      cfg.lambda = 1.0;
      exact1 &= td_update(traj, w4, cfg).delta == td1_closed_form(syn.values, syn.gradients, syn.reward, 0.5);
    }
    r.add("lambda=0 update equals the one-step closed form exactly (dyadic trajectories)", exact0);
    r.add("lambda=1 update equals the final-reward closed form exactly (dyadic trajectories)", exact1);
  }

  const auto trajectories = sample_trajectories(60, 2, seed);
  {
    bool exact0 = true;
    double worst1 = 0.0, worst_fd = 0.0, worst_direct = 0.0;
    const TicTacToe game;
    const SquashConfig squash{true, kDefaultBeta};
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      const auto& traj = trajectories[i];
      std::vector<double> values;
      std::vector<std::vector<double>> grads;
      std::vector<TicTacToe::State> roots;
      for (const auto& rec : traj.records) {
        values.push_back(rec.root_eval.value);
        grads.push_back(rec.root_eval.gradient);
        roots.push_back(rec.root);
      }
      const auto w = random_weights(4, rng);
      UpdateConfig cfg;
      cfg.algorithm = Algorithm::TD;
      cfg.alpha = 0.3;
      cfg.lambda = 0.0;
      exact0 &= td_update(traj, w, cfg).delta == td0_closed_form(values, grads, traj.reward, 0.3);
      cfg.lambda = 1.0;
      const auto d1 = td_update(traj, w, cfg).delta;
      worst1 = std::max(worst1, max_abs_diff(d1, td1_closed_form(values, grads, traj.reward, 0.3)));

      // TD(1) as gradient descent on E(w) = sum_t (r - J(x_t, w))^2, with the
      // trajectory re-evaluated at w.
      GameTrajectory<TicTacToe> fresh = traj;
      for (auto& rec : fresh.records) rec.root_eval = evaluate(game, rec.root, w, squash);
      const auto d_fresh = td_update(fresh, w, cfg).delta;
      auto fd = oracle::finite_difference_gradient(
          [&](const ParamVector& p) { return oracle::squared_error(game, roots, traj.reward, p, squash); }, w, 1e-6);
      for (auto& x : fd) x *= -0.3 / 2.0;
      worst_fd = std::max(worst_fd, max_rel_error(d_fresh, fd));

      // Direct double sum over the search values and leaf gradients, read
      // back from the trajectory dump.
      std::stringstream dump;
      write_trajectory(dump, game, game.id(), traj, 4);
      const auto parsed = read_trajectory(dump);
      std::vector<double> dv;
      std::vector<std::vector<double>> dg;
      for (const auto& rec : parsed.records) {
        dv.push_back(rec.value);
        dg.push_back(rec.gradient);
      }
      cfg.algorithm = Algorithm::TDLeaf;
      cfg.lambda = 0.7;
      const auto leaf_delta = tdleaf_update(traj, w, cfg).delta;
      worst_direct = std::max(worst_direct,
                              max_abs_diff(leaf_delta, oracle::direct_td_update(dv, dg, parsed.reward, 0.7, 0.3)));
    }
    r.add("lambda=0 update equals the one-step closed form exactly (played games)", exact0);
    r.add("lambda=1 update equals the final-reward closed form within 1e-12 (played games)", worst1 <= 1e-12,
          "max abs diff " + format_double(worst1));
    r.add("TD(1) update equals -(alpha/2) grad E(w) within 1e-5", worst_fd <= 1e-5,
          "max rel error " + format_double(worst_fd));
    r.add("TDLeaf(0.7) update equals the direct double sum within 1e-12", worst_direct <= 1e-12,
          "max abs diff " + format_double(worst_direct));
  }

  {
    const auto d0 = sample_trajectories(40, 0, seed + 1);
    bool identical = true;
    for (const auto& traj : d0) {
      const auto w = random_weights(4, rng);
      UpdateConfig td;
      td.algorithm = Algorithm::TD;
      UpdateConfig leaf = td;
      leaf.algorithm = Algorithm::TDLeaf;
      leaf.depth = 0;
      const auto a = td_update(traj, w, td);
      const auto b = tdleaf_update(traj, w, leaf);
      identical &= a.delta == b.delta && a.differences == b.differences && a.lambda_sums == b.lambda_sums;
    }
    r.add("TDLeaf at depth 0 is bit-identical to TD", identical);
  }
  return r;
}

inline void print(std::ostream& out, const std::string& suite, const SuiteReport& r) {
  for (const auto& w : r.warnings) out << "WARNING " << w << "\n";
  for (const auto& c : r.checks)
    out << (c.passed ? "PASS " : "FAIL ") << suite << ": " << c.name << (c.detail.empty() ? "" : " [" + c.detail + "]")
        << "\n";
}

}  // namespace tdleaf::verify
