// Linear evaluation functions over game features, optionally squashed by
// tanh into the reward range, with analytic gradients, a central-difference
// gradient checker and the weight-file format.

#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tdleaf/core.hpp"

namespace tdleaf {

// tanh(kDefaultBeta * 1) == 0.25: a one-pawn edge predicts a quarter of a win.
inline const double kDefaultBeta = std::atanh(0.25);

struct SquashConfig {
  bool enabled = false;
  double beta = kDefaultBeta;

  friend bool operator==(const SquashConfig&, const SquashConfig&) = default;
};

inline void validate(const SquashConfig& squash) {
  if (!(squash.beta > 0.0) || !std::isfinite(squash.beta)) throw Error("squash beta must be positive");
}

struct ParamVector {
  std::vector<double> values;
  std::size_t updates = 0;

  ParamVector() = default;
  explicit ParamVector(std::vector<double> v, std::size_t update_count = 0)
      : values(std::move(v)), updates(update_count) {}

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  bool finite() const {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

struct EvalResult {
  double value = 0.0;
  std::vector<double> gradient;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Terminal states score their reward with a zero gradient; elsewhere the
// value is s(w . f(x)) with s the identity or tanh(beta .).
template <Game G>
EvalResult evaluate(const G& game, const typename G::State& state, const ParamVector& w,
                    const SquashConfig& squash = {}) {
  if (game.is_terminal(state))
    return {static_cast<double>(game.terminal_reward(state)), std::vector<double>(w.size(), 0.0)};
  FeatureVector f = game.features(state);
  if (f.size() != w.size())
    throw Error("dimension mismatch: " + std::to_string(w.size()) + " weights for " +
                std::to_string(f.size()) + " features");
  const double z = dot(w.values, f);
  if (!squash.enabled) return {z, std::move(f)};
  const double v = std::tanh(squash.beta * z);
  const double slope = squash.beta * (1.0 - v * v);
  for (double& x : f) x *= slope;
  return {v, std::move(f)};
}

// Max component-wise relative error between the analytic gradient and
// central differences; the denominator is floored at 1e-8.
template <Game G>
double grad_check(const G& game, const typename G::State& state, const ParamVector& w,
                  const SquashConfig& squash, double step = 1e-6) {
  if (!(step > 0.0)) throw Error("finite-difference step must be positive");
  const auto analytic = evaluate(game, state, w, squash).gradient;
  double worst = 0.0;
  ParamVector probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    probe.values[i] = w.values[i] + step;
    const double up = evaluate(game, state, probe, squash).value;
    probe.values[i] = w.values[i] - step;
    const double down = evaluate(game, state, probe, squash).value;
    probe.values[i] = w.values[i];
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

// Conventional "computer" piece values in pawns.
inline const std::map<std::string, double>& material_values() {
  static const std::map<std::string, double> kValues{
      {"material_pawn", 1.0},  {"material_knight", 4.0}, {"material_bishop", 4.0},
      {"material_rook", 6.0},  {"material_queen", 12.0}};
  return kValues;
}

inline bool has_material_features(const std::vector<std::string>& names) {
  return std::any_of(names.begin(), names.end(),
                     [](const std::string& n) { return material_values().count(n) > 0; });
}

// Material weights at their piece values, every other weight zero.
template <PlayableGame G>
ParamVector material_init(const G& game) {
  const auto names = game.feature_names();
  if (!has_material_features(names))
    throw Error("game " + std::string(game.id()) + " has no material features");
  std::vector<double> w(names.size(), 0.0);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto it = material_values().find(names[i]);
    if (it != material_values().end()) w[i] = it->second;
  }
  return ParamVector(std::move(w));
}

// Every coefficient at the value of a pawn.
template <PlayableGame G>
ParamVector pawn_equal_init(const G& game) {
  const auto names = game.feature_names();
  if (!has_material_features(names))
    throw Error("game " + std::string(game.id()) + " has no material features");
  return ParamVector(std::vector<double>(names.size(), material_values().at("material_pawn")));
}

// Weight file, version 1:
//
//   tdleaf-weights 1
//   game <id>
//   k <count>
//   squash <on|off> <beta>
//   updates <count>
//   <feature-name> <value>      (k lines, in feature order)
//
// Reals are written with 17 significant digits so reading restores them
// bit for bit.
struct WeightFile {
  std::string game;
  std::vector<std::string> names;
  ParamVector weights;
  SquashConfig squash;

  friend bool operator==(const WeightFile&, const WeightFile&) = default;
};

inline void write_weights(std::ostream& out, const WeightFile& file) {
  if (file.names.size() != file.weights.size()) throw Error("weight/name count mismatch");
  out << "tdleaf-weights 1\n";
  out << "game " << file.game << "\n";
  out << "k " << file.weights.size() << "\n";
  out << "squash " << (file.squash.enabled ? "on" : "off") << " " << format_double(file.squash.beta)
      << "\n";
  out << "updates " << file.weights.updates << "\n";
  for (std::size_t i = 0; i < file.names.size(); ++i)
    out << file.names[i] << " " << format_double(file.weights[i]) << "\n";
}

inline WeightFile read_weights(std::istream& in) {
  WeightFile file;
  std::string line;
  int line_no = 0;
  auto next = [&](std::string_view what) {
    if (!std::getline(in, line)) throw Error("weight file truncated: expected " + std::string(what));
    ++line_no;
    return std::istringstream(line);
  };
  auto fail = [&](std::string_view what) {
    return Error("weight file line " + std::to_string(line_no) + ": " + std::string(what));
  };
  std::string key;
  {
    auto ls = next("header");
    int version = 0;
    if (!(ls >> key >> version) || key != "tdleaf-weights") throw fail("missing tdleaf-weights header");
    if (version != 1) throw fail("unsupported version " + std::to_string(version));
  }
  {
    auto ls = next("game");
    if (!(ls >> key >> file.game) || key != "game") throw fail("expected 'game <id>'");
  }
  std::size_t k = 0;
  {
    auto ls = next("k");
    if (!(ls >> key >> k) || key != "k") throw fail("expected 'k <count>'");
  }
  {
    auto ls = next("squash");
    std::string flag, beta;
    if (!(ls >> key >> flag >> beta) || key != "squash" || (flag != "on" && flag != "off"))
      throw fail("expected 'squash <on|off> <beta>'");
    file.squash.enabled = flag == "on";
    try {
      file.squash.beta = std::stod(beta);
    } catch (const std::exception&) {
      throw fail("unparseable beta '" + beta + "'");
    }
    if (!(file.squash.beta > 0.0) || !std::isfinite(file.squash.beta)) throw fail("beta must be positive");
  }
  {
    auto ls = next("updates");
    if (!(ls >> key >> file.weights.updates) || key != "updates") throw fail("expected 'updates <count>'");
  }
  for (std::size_t i = 0; i < k; ++i) {
    auto ls = next("weight");
    std::string name, value;
    if (!(ls >> name >> value)) throw fail("expected '<name> <value>'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      throw fail("unparseable value '" + value + "'");
    }
    if (used != value.size() || !std::isfinite(v)) throw fail("bad value '" + value + "'");
    file.names.push_back(name);
    file.weights.values.push_back(v);
  }
  return file;
}

}  // namespace tdleaf
