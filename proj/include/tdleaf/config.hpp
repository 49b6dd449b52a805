// Experiment configuration: flat key = value text grouped in [sections].
// Lines starting with '#' or ';' are comments. Unknown sections or keys are
// rejected with the offending line number. Input paths (weights_file and
// weight-file agents) are resolved against the config file's directory by the
// command-line front end; the output directory is relative to the working
// directory.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tdleaf/core.hpp"
#include "tdleaf/eval.hpp"
#include "tdleaf/harness.hpp"
#include "tdleaf/td.hpp"

namespace tdleaf {

struct ExperimentConfig {
  // [experiment]
  std::string game = "tictactoe";
  Regime regime = Regime::Pool;
  std::size_t games = 2000;
  std::uint64_t seed = 1;
  std::string output = "out";
  int workers = 1;
  std::size_t snapshot_interval = 0;
  double divergence_bound = 1e6;
  bool dump_trajectories = false;

  // [learning]
  Algorithm algorithm = Algorithm::TDLeaf;
  double lambda = 0.7;
  double alpha = 1.0;
  AlphaSchedule alpha_schedule = AlphaSchedule::Constant;
  int depth = 2;
  std::optional<double> epsilon;  // default: 0.05 deterministic, 0 stochastic
  TrajectoryPositions positions = TrajectoryPositions::LearnerMoves;
  std::optional<double> max_norm;

  // [eval]
  std::string init = "zero";  // zero | material | pawn | reference | file
  std::string weights_file;
  bool squash = true;
  double beta = kDefaultBeta;

  // [pool]
  std::size_t calibration_games = 40;
  double solver_error = 0.2;
  std::size_t rating_games = 0;  // per pool member; 0 starts the learner at 1000

  // [match]
  std::string agent_a;
  std::string agent_b;
  int depth_a = 2;
  int depth_b = 2;
  std::size_t match_games = 100;

  // [disagreement]
  std::size_t sample_positions = 10000;
  int depth1 = 1;
  int depth2 = 2;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_integer(const std::string& v, const std::string& where) {
  T out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) throw ConfigError(where + ": expected an integer, got '" + v + "'");
  return out;
}

inline double parse_real(const std::string& v, const std::string& where) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) throw ConfigError(where + ": expected a real, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(where + ": expected on/off, got '" + v + "'");
}

template <typename E>
E parse_enum(const std::string& v, const std::string& where, const std::vector<std::pair<std::string, E>>& names) {
  for (const auto& [name, e] : names)
    if (name == v) return e;
  std::string allowed;
  for (const auto& [name, e] : names) allowed += (allowed.empty() ? "" : "|") + name;
  throw ConfigError(where + ": expected one of " + allowed + ", got '" + v + "'");
}

template <typename E>
std::string enum_name(E e, const std::vector<std::pair<std::string, E>>& names) {
  for (const auto& [name, value] : names)
    if (value == e) return name;
  return "?";
}

inline const std::vector<std::pair<std::string, Regime>>& regime_names() {
  static const std::vector<std::pair<std::string, Regime>> k{{"self-play", Regime::SelfPlay}, {"pool", Regime::Pool}};
  return k;
}
inline const std::vector<std::pair<std::string, Algorithm>>& algorithm_names() {
  static const std::vector<std::pair<std::string, Algorithm>> k{
      {"td", Algorithm::TD}, {"td-directed", Algorithm::TDDirected}, {"tdleaf", Algorithm::TDLeaf}};
  return k;
}
inline const std::vector<std::pair<std::string, AlphaSchedule>>& schedule_names() {
  static const std::vector<std::pair<std::string, AlphaSchedule>> k{
      {"constant", AlphaSchedule::Constant}, {"inverse", AlphaSchedule::InverseGames}};
  return k;
}
inline const std::vector<std::pair<std::string, TrajectoryPositions>>& positions_names() {
  static const std::vector<std::pair<std::string, TrajectoryPositions>> k{
      {"learner", TrajectoryPositions::LearnerMoves}, {"all", TrajectoryPositions::All}};
  return k;
}

}  // namespace detail

inline const std::vector<std::string>& known_games() {
  static const std::vector<std::string> k{"tictactoe", "connect4", "minichess", "dice-race", "dice-race-short"};
  return k;
}

// Range checks that do not depend on where the value came from.
inline void validate(const ExperimentConfig& c) {
  bool known = false;
  for (const auto& g : known_games()) known |= g == c.game;
  if (!known) throw ConfigError("game: unknown game '" + c.game + "'");
  if (c.games < 1) throw ConfigError("games: must be at least 1");
  if (c.workers < 1) throw ConfigError("workers: must be at least 1");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw ConfigError("lambda: λ ∈ [0,1] required, got " + format_double(c.lambda));
  if (!(c.alpha >= 0.0)) throw ConfigError("alpha: must be non-negative");
  if (c.depth < 0 || c.depth_a < 0 || c.depth_b < 0 || c.depth1 < 0 || c.depth2 < 0)
    throw ConfigError("depth: must be >= 0");
  if (c.epsilon && !(*c.epsilon >= 0.0 && *c.epsilon <= 1.0)) throw ConfigError("epsilon: must lie in [0,1]");
  if (c.max_norm && !(*c.max_norm > 0.0)) throw ConfigError("max_norm: must be positive");
  if (!(c.beta > 0.0)) throw ConfigError("beta: must be positive");
  if (!(c.divergence_bound > 0.0)) throw ConfigError("divergence_bound: must be positive");
  if (!(c.solver_error >= 0.0 && c.solver_error <= 1.0)) throw ConfigError("solver_error: must lie in [0,1]");
  if (c.init != "zero" && c.init != "material" && c.init != "pawn" && c.init != "reference" && c.init != "file")
    throw ConfigError("init: expected zero|material|pawn|reference|file, got '" + c.init + "'");
  if (c.init == "file" && c.weights_file.empty()) throw ConfigError("weights_file: required when init = file");
}

inline ExperimentConfig parse_config(std::istream& in) {
  using namespace detail;
  ExperimentConfig c;
  std::string section;
  std::string raw;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string at = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "experiment" && section != "learning" && section != "eval" && section != "pool" &&
          section != "match" && section != "disagreement")
        throw ConfigError(at + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ConfigError(at + ": key '" + key + "' outside any section");
    const std::string where = at + ": key '" + key + "'";
    const std::string full = section + "." + key;
    if (seen.count(full)) throw ConfigError(where + " repeated (first on line " + std::to_string(seen[full]) + ")");
    seen[full] = line_no;

    try {
      if (section == "experiment") {
        if (key == "game") c.game = value;
        else if (key == "regime") c.regime = parse_enum(value, where, regime_names());
        else if (key == "games") c.games = parse_integer<std::size_t>(value, where);
        else if (key == "seed") c.seed = parse_integer<std::uint64_t>(value, where);
        else if (key == "output") c.output = value;
        else if (key == "workers") c.workers = parse_integer<int>(value, where);
        else if (key == "snapshot_interval") c.snapshot_interval = parse_integer<std::size_t>(value, where);
        else if (key == "divergence_bound") c.divergence_bound = parse_real(value, where);
        else if (key == "dump_trajectories") c.dump_trajectories = parse_bool(value, where);
        else throw ConfigError(at + ": unknown key '" + key + "' in [experiment]");
      } else if (section == "learning") {
        if (key == "algorithm") c.algorithm = parse_enum(value, where, algorithm_names());
        else if (key == "lambda") c.lambda = parse_real(value, where);
        else if (key == "alpha") c.alpha = parse_real(value, where);
        else if (key == "alpha_schedule") c.alpha_schedule = parse_enum(value, where, schedule_names());
        else if (key == "depth") c.depth = parse_integer<int>(value, where);
        else if (key == "epsilon") c.epsilon = parse_real(value, where);
        else if (key == "positions") c.positions = parse_enum(value, where, positions_names());
        else if (key == "max_norm") c.max_norm = parse_real(value, where);
        else throw ConfigError(at + ": unknown key '" + key + "' in [learning]");
      } else if (section == "eval") {
        if (key == "init") c.init = value;
        else if (key == "weights_file") c.weights_file = value;
        else if (key == "squash") c.squash = parse_bool(value, where);
        else if (key == "beta") c.beta = parse_real(value, where);
        else throw ConfigError(at + ": unknown key '" + key + "' in [eval]");
      } else if (section == "pool") {
        if (key == "calibration_games") c.calibration_games = parse_integer<std::size_t>(value, where);
        else if (key == "solver_error") c.solver_error = parse_real(value, where);
        else if (key == "rating_games") c.rating_games = parse_integer<std::size_t>(value, where);
        else throw ConfigError(at + ": unknown key '" + key + "' in [pool]");
      } else if (section == "match") {
        if (key == "agent_a") c.agent_a = value;
        else if (key == "agent_b") c.agent_b = value;
        else if (key == "depth_a") c.depth_a = parse_integer<int>(value, where);
        else if (key == "depth_b") c.depth_b = parse_integer<int>(value, where);
        else if (key == "games") c.match_games = parse_integer<std::size_t>(value, where);
        else throw ConfigError(at + ": unknown key '" + key + "' in [match]");
      } else {
        if (key == "positions") c.sample_positions = parse_integer<std::size_t>(value, where);
        else if (key == "depth1") c.depth1 = parse_integer<int>(value, where);
        else if (key == "depth2") c.depth2 = parse_integer<int>(value, where);
        else throw ConfigError(at + ": unknown key '" + key + "' in [disagreement]");
      }
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw ConfigError(where + ": " + msg);
    }
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    // Point at the line that set the offending key, when there is one.
    const std::string msg = e.what();
    const std::string key = msg.substr(0, msg.find(':'));
    for (const auto& [full, line] : seen)
      if (full.size() > key.size() && full.compare(full.size() - key.size(), key.size(), key) == 0 &&
          full[full.size() - key.size() - 1] == '.')
        throw ConfigError("line " + std::to_string(line) + ": key '" + key + "'" + msg.substr(key.size()));
    throw;
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline void write_config(std::ostream& out, const ExperimentConfig& c) {
  using namespace detail;
  out << "[experiment]\n";
  out << "game = " << c.game << "\n";
  out << "regime = " << enum_name(c.regime, regime_names()) << "\n";
  out << "games = " << c.games << "\n";
  out << "seed = " << c.seed << "\n";
  out << "output = " << c.output << "\n";
  out << "workers = " << c.workers << "\n";
  out << "snapshot_interval = " << c.snapshot_interval << "\n";
  out << "divergence_bound = " << format_double(c.divergence_bound) << "\n";
  out << "dump_trajectories = " << (c.dump_trajectories ? "on" : "off") << "\n";
  out << "\n[learning]\n";
  out << "algorithm = " << enum_name(c.algorithm, algorithm_names()) << "\n";
  out << "lambda = " << format_double(c.lambda) << "\n";
  out << "alpha = " << format_double(c.alpha) << "\n";
  out << "alpha_schedule = " << enum_name(c.alpha_schedule, schedule_names()) << "\n";
  out << "depth = " << c.depth << "\n";
  if (c.epsilon) out << "epsilon = " << format_double(*c.epsilon) << "\n";
  out << "positions = " << enum_name(c.positions, positions_names()) << "\n";
  if (c.max_norm) out << "max_norm = " << format_double(*c.max_norm) << "\n";
  out << "\n[eval]\n";
  out << "init = " << c.init << "\n";
  if (!c.weights_file.empty()) out << "weights_file = " << c.weights_file << "\n";
  out << "squash = " << (c.squash ? "on" : "off") << "\n";
  out << "beta = " << format_double(c.beta) << "\n";
  out << "\n[pool]\n";
  out << "calibration_games = " << c.calibration_games << "\n";
  out << "solver_error = " << format_double(c.solver_error) << "\n";
  out << "rating_games = " << c.rating_games << "\n";
  out << "\n[match]\n";
  if (!c.agent_a.empty()) out << "agent_a = " << c.agent_a << "\n";
  if (!c.agent_b.empty()) out << "agent_b = " << c.agent_b << "\n";
  out << "depth_a = " << c.depth_a << "\n";
  out << "depth_b = " << c.depth_b << "\n";
  out << "games = " << c.match_games << "\n";
  out << "\n[disagreement]\n";
  out << "positions = " << c.sample_positions << "\n";
  out << "depth1 = " << c.depth1 << "\n";
  out << "depth2 = " << c.depth2 << "\n";
}

inline UpdateConfig update_config(const ExperimentConfig& c) {
  UpdateConfig u;
  u.algorithm = c.algorithm;
  u.lambda = c.lambda;
  u.alpha = c.alpha;
  u.schedule = c.alpha_schedule;
  u.depth = c.depth;
  u.positions = c.positions;
  u.max_norm = c.max_norm;
  return u;
}

inline SquashConfig squash_config(const ExperimentConfig& c) { return {c.squash, c.beta}; }

}  // namespace tdleaf
