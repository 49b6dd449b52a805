// End-of-game TD(lambda) updates: TD and TD-directed on root evaluations,
// TDLeaf on the principal-variation leaves of each root search.
//
// For a game with decision points x_1..x_{N-1} and reward r:
//   d_t  = J(x_{t+1}) - J(x_t),  d_{N-1} = r - J(x_{N-1})
//   dw   = alpha * sum_t grad J(x_t) * sum_{j>=t} lambda^(j-t) d_j
// where J is the root evaluation (TD, TD-directed) or the depth-d search
// value (TDLeaf).

#pragma once

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tdleaf/core.hpp"
#include "tdleaf/eval.hpp"
#include "tdleaf/search.hpp"

namespace tdleaf {

enum class Algorithm { TD, TDDirected, TDLeaf };
enum class AlphaSchedule { Constant, InverseGames };
// Which positions enter a trajectory: only those where the learner is to
// move, or every position of the game.
enum class TrajectoryPositions { LearnerMoves, All };

struct UpdateConfig {
  Algorithm algorithm = Algorithm::TDLeaf;
  double lambda = 0.7;
  double alpha = 1.0;
  AlphaSchedule schedule = AlphaSchedule::Constant;
  int depth = 2;
  TrajectoryPositions positions = TrajectoryPositions::LearnerMoves;
  std::optional<double> max_norm;  // disabled unless set

  friend bool operator==(const UpdateConfig&, const UpdateConfig&) = default;
};

inline void validate(const UpdateConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw Error("lambda must lie in [0,1]");
  if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw Error("alpha must be non-negative");
  if (cfg.depth < 0) throw Error("search depth must be >= 0");
  if (cfg.max_norm && !(*cfg.max_norm > 0.0)) throw Error("max_norm must be positive");
}

// Learning rate for the n-th game (1-based).
inline double alpha_for_game(const UpdateConfig& cfg, std::size_t game_number) {
  if (cfg.schedule == AlphaSchedule::InverseGames && game_number > 0)
    return cfg.alpha / static_cast<double>(game_number);
  return cfg.alpha;
}

template <Game G>
struct TrajectoryRecord {
  std::size_t move_index = 0;  // ply number of x_t within the game
  typename G::State root{};
  EvalResult root_eval;
  std::optional<SearchResult<G>> search;
};

template <Game G>
struct GameTrajectory {
  std::vector<TrajectoryRecord<G>> records;
  Reward reward = 0.0;

  // N: the records are x_1..x_{N-1}, the terminal position is x_N.
  std::size_t length() const { return records.size() + 1; }
};

struct UpdateReport {
  std::vector<double> delta;
  std::vector<double> differences;
  std::vector<double> lambda_sums;
};

inline std::vector<double> temporal_differences(std::span<const double> values, double reward) {
  if (values.empty()) throw Error("temporal differences need at least one prediction");
  std::vector<double> d(values.size());
  for (std::size_t t = 0; t + 1 < values.size(); ++t) d[t] = values[t + 1] - values[t];
  d.back() = reward - values.back();
  return d;
}

// out[t] = d[t] + lambda * out[t+1]
inline std::vector<double> lambda_sum(std::span<const double> d, double lambda) {
  std::vector<double> out(d.size());
  double acc = 0.0;
  for (std::size_t t = d.size(); t-- > 0;) {
    acc = d[t] + lambda * acc;
    out[t] = acc;
  }
  return out;
}

namespace detail {

inline UpdateReport td_core(std::span<const double> values,
                            std::span<const std::vector<double>> gradients, double reward,
                            const UpdateConfig& cfg, double alpha, std::size_t k) {
  validate(cfg);
  UpdateReport report;
  report.differences = temporal_differences(values, reward);
  report.lambda_sums = lambda_sum(report.differences, cfg.lambda);
  report.delta.assign(k, 0.0);
  for (std::size_t t = 0; t < values.size(); ++t) {
    const auto& g = gradients[t];
    if (g.size() != k)
      throw Error("record " + std::to_string(t) + " has gradient length " + std::to_string(g.size()) +
                  ", expected " + std::to_string(k));
    for (std::size_t i = 0; i < k; ++i) {
      if (!std::isfinite(g[i]))
        throw Error("non-finite gradient component " + std::to_string(i) + " at record " + std::to_string(t));
      report.delta[i] += g[i] * report.lambda_sums[t];
    }
  }
  for (double& x : report.delta) x *= alpha;
  if (cfg.max_norm) {
    double norm = 0.0;
    for (double x : report.delta) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > *cfg.max_norm)
      for (double& x : report.delta) x *= *cfg.max_norm / norm;
  }
  for (double x : report.delta)
    if (!std::isfinite(x)) throw Error("non-finite weight update");
  return report;
}

}  // namespace detail

// TD(lambda) / TD-directed(lambda): predictions and gradients at the root
// positions. `alpha` overrides cfg.alpha (for annealing schedules).
template <Game G>
UpdateReport td_update(const GameTrajectory<G>& traj, const ParamVector& w, const UpdateConfig& cfg,
                       std::optional<double> alpha = std::nullopt) {
  if (cfg.algorithm == Algorithm::TDLeaf) throw Error("td_update called with the TDLeaf algorithm");
  std::vector<double> values;
  std::vector<std::vector<double>> grads;
  for (const auto& r : traj.records) {
    values.push_back(r.root_eval.value);
    grads.push_back(r.root_eval.gradient);
  }
  return detail::td_core(values, grads, traj.reward, cfg, alpha.value_or(cfg.alpha), w.size());
}

// TDLeaf(lambda): predictions are the search values J_d(x_t) and gradients
// the PV-leaf gradients.
template <Game G>
UpdateReport tdleaf_update(const GameTrajectory<G>& traj, const ParamVector& w, const UpdateConfig& cfg,
                           std::optional<double> alpha = std::nullopt) {
  if (cfg.algorithm != Algorithm::TDLeaf) throw Error("tdleaf_update requires the TDLeaf algorithm");
  std::vector<double> values;
  std::vector<std::vector<double>> grads;
  for (std::size_t t = 0; t < traj.records.size(); ++t) {
    const auto& r = traj.records[t];
    if (!r.search) throw Error("record " + std::to_string(t) + " has no search result");
    values.push_back(r.search->value);
    grads.push_back(r.search->leaf_gradient);
  }
  return detail::td_core(values, grads, traj.reward, cfg, alpha.value_or(cfg.alpha), w.size());
}

template <Game G>
UpdateReport compute_update(const GameTrajectory<G>& traj, const ParamVector& w, const UpdateConfig& cfg,
                            std::optional<double> alpha = std::nullopt) {
  return cfg.algorithm == Algorithm::TDLeaf ? tdleaf_update(traj, w, cfg, alpha)
                                            : td_update(traj, w, cfg, alpha);
}

inline void apply_update(ParamVector& w, const UpdateReport& report) {
  if (report.delta.size() != w.size()) throw Error("update length does not match weights");
  ParamVector next = w;
  for (std::size_t i = 0; i < w.size(); ++i) next.values[i] += report.delta[i];
  if (!next.finite()) throw Error("weight update produced a non-finite weight");
  ++next.updates;
  w = std::move(next);
}

// Trajectory dump, version 1. One block per record, then the reward:
//
//   tdleaf-trajectory 1
//   game <id>
//   k <count>
//   records <count>
//   record <move index>
//   root <state>
//   depth <plies>
//   value <search value>
//   pv <move names separated by spaces, or '-'>
//   leaf <state>
//   gradient <k reals>
//   root_value <root evaluation>
//   root_gradient <k reals>
//   end
//   ...
//   reward <r>
struct TrajectoryDumpRecord {
  std::size_t move_index = 0;
  std::string root;
  int depth = 0;
  double value = 0.0;
  std::vector<std::string> pv;
  std::string leaf;
  std::vector<double> gradient;
  double root_value = 0.0;
  std::vector<double> root_gradient;
};

struct TrajectoryDump {
  std::string game;
  std::size_t k = 0;
  std::vector<TrajectoryDumpRecord> records;
  double reward = 0.0;
};

template <Game G>
void write_trajectory(std::ostream& out, const G& game, std::string_view game_id,
                      const GameTrajectory<G>& traj, std::size_t k) {
  auto vec = [&](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
    return s;
  };
  out << "tdleaf-trajectory 1\n";
  out << "game " << game_id << "\n";
  out << "k " << k << "\n";
  out << "records " << traj.records.size() << "\n";
  for (const auto& r : traj.records) {
    out << "record " << r.move_index << "\n";
    out << "root " << game.serialize(r.root) << "\n";
    if (r.search) {
      out << "depth " << r.search->depth << "\n";
      out << "value " << format_double(r.search->value) << "\n";
      std::string pv;
      for (const auto& m : r.search->pv) pv += (pv.empty() ? "" : " ") + move_name(game, m);
      out << "pv " << (pv.empty() ? "-" : pv) << "\n";
      out << "leaf " << game.serialize(r.search->leaf) << "\n";
      out << "gradient " << vec(r.search->leaf_gradient) << "\n";
    } else {
      out << "depth 0\nvalue " << format_double(r.root_eval.value) << "\npv -\nleaf "
          << game.serialize(r.root) << "\ngradient " << vec(r.root_eval.gradient) << "\n";
    }
    out << "root_value " << format_double(r.root_eval.value) << "\n";
    out << "root_gradient " << vec(r.root_eval.gradient) << "\n";
    out << "end\n";
  }
  out << "reward " << format_double(traj.reward) << "\n";
}

inline TrajectoryDump read_trajectory(std::istream& in) {
  TrajectoryDump dump;
  std::string line;
  int line_no = 0;
  auto expect = [&](std::string_view key) {
    if (!std::getline(in, line)) throw Error("trajectory dump truncated: expected '" + std::string(key) + "'");
    ++line_no;
    if (line.compare(0, key.size(), key) != 0 || (line.size() > key.size() && line[key.size()] != ' '))
      throw Error("trajectory dump line " + std::to_string(line_no) + ": expected '" + std::string(key) + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  };
  auto reals = [&](const std::string& text) {
    std::vector<double> out;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) out.push_back(std::stod(tok));
    return out;
  };
  if (expect("tdleaf-trajectory") != "1") throw Error("unsupported trajectory dump version");
  try {
    dump.game = expect("game");
    dump.k = std::stoul(expect("k"));
    const std::size_t n = std::stoul(expect("records"));
    for (std::size_t i = 0; i < n; ++i) {
      TrajectoryDumpRecord r;
      r.move_index = std::stoul(expect("record"));
      r.root = expect("root");
      r.depth = std::stoi(expect("depth"));
      r.value = std::stod(expect("value"));
      const auto pv = expect("pv");
      if (pv != "-") {
        std::istringstream ss(pv);
        std::string tok;
        while (ss >> tok) r.pv.push_back(tok);
      }
      r.leaf = expect("leaf");
      r.gradient = reals(expect("gradient"));
      r.root_value = std::stod(expect("root_value"));
      r.root_gradient = reals(expect("root_gradient"));
      expect("end");
      if (r.gradient.size() != dump.k || r.root_gradient.size() != dump.k)
        throw Error("trajectory dump record " + std::to_string(i) + " has a gradient of the wrong length");
      dump.records.push_back(std::move(r));
    }
    dump.reward = std::stod(expect("reward"));
  } catch (const std::logic_error&) {
    throw Error("trajectory dump line " + std::to_string(line_no) + ": malformed number");
  }
  return dump;
}

}  // namespace tdleaf
