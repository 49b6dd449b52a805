// Command-line front end. `run` is kept separate from main() so the tests can
// drive every command in-process.

#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdleaf/tdleaf.hpp"

namespace tdleaf::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kValidation = 1, kDivergence = 2, kVerification = 3 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
};

// Calls f with the game instance named by id.
template <typename F>
int with_game(const std::string& id, F&& f) {
  if (id == "tictactoe") return f(games::TicTacToe{});
  if (id == "connect4") return f(games::Connect4{});
  if (id == "minichess") return f(games::Minichess{});
  if (id == "dice-race") return f(games::DiceRace{});
  if (id == "dice-race-short") return f(games::DiceRace{6, 2, 40});
  throw ConfigError("game: unknown game '" + id + "'");
}

inline ExperimentConfig load_config(const std::string& path, const Overrides& o) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  auto cfg = parse_config(in);
  const auto base = fs::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(cfg.weights_file);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output = *o.out;
  if (o.workers) cfg.workers = *o.workers;
  validate(cfg);
  return cfg;
}

inline std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

template <PlayableGame G>
WeightFile load_weight_file(const G& game, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open weight file " + path);
  auto file = read_weights(in);
  if (file.game != game.id())
    throw ConfigError("weight file " + path + " is for game '" + file.game + "', expected '" +
                      std::string(game.id()) + "'");
  if (file.weights.size() != game.feature_count())
    throw ConfigError("weight file " + path + " has " + std::to_string(file.weights.size()) + " weights, expected " +
                      std::to_string(game.feature_count()));
  return file;
}

template <PlayableGame G>
void save_weight_file(const G& game, const fs::path& path, const ParamVector& w, const SquashConfig& squash) {
  auto out = open_output(path);
  write_weights(out, WeightFile{std::string(game.id()), game.feature_names(), w, squash});
}

template <PlayableGame G>
ParamVector initial_weights(const G& game, const ExperimentConfig& cfg) {
  if (cfg.init == "zero") return ParamVector(std::vector<double>(game.feature_count(), 0.0));
  if (cfg.init == "material") return material_init(game);
  if (cfg.init == "pawn") return pawn_equal_init(game);
  if (cfg.init == "reference") return ParamVector(game.reference_weights());
  if (cfg.init == "file") return load_weight_file(game, cfg.weights_file).weights;
  throw ConfigError("init: unknown initialisation '" + cfg.init + "'");
}

template <PlayableGame G>
std::shared_ptr<ExactSolver<G>> pool_solver(const G& game) {
  // Exhaustive solving is only practical for the small games.
  if (game.id() == "tictactoe" || game.id() == "dice-race-short") return std::make_shared<ExactSolver<G>>(game);
  return nullptr;
}

// Agent named in a match config: "random", "reference" or a weight file,
// looked up relative to `base`. The agent keeps the name it was given.
template <PlayableGame G>
AgentSpec<G> match_agent(const G& game, const std::string& spec, int depth, const fs::path& base = {}) {
  if (spec.empty()) throw ConfigError("agent: missing agent specification");
  if (spec == "random") return random_agent<G>();
  if (spec == "reference")
    return search_agent<G>("reference", ParamVector(game.reference_weights()),
                           default_search<G>(depth, SquashConfig{true, kDefaultBeta}));
  const auto file = load_weight_file(game, fs::path(spec).is_relative() ? (base / spec).lexically_normal().string() : spec);
  return search_agent<G>(spec, file.weights, default_search<G>(depth, file.squash));
}

// ------------------------------------------------------------------- train

template <PlayableGame G>
int train_command(const G& game, const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path dir(cfg.output);
  TrainConfig<G> tc;
  tc.regime = cfg.regime;
  tc.games = cfg.games;
  tc.update = update_config(cfg);
  tc.squash = squash_config(cfg);
  if (cfg.epsilon) tc.epsilon = *cfg.epsilon;
  tc.initial = initial_weights(game, cfg);
  tc.seed = cfg.seed;
  tc.snapshot_interval = cfg.snapshot_interval;
  tc.divergence_bound = cfg.divergence_bound;
  tc.workers = cfg.workers;
  tc.rating.rating = 1000.0;

  if (cfg.regime == Regime::Pool) {
    tc.pool = graded_pool(game, pool_solver(game), cfg.solver_error);
    const auto cal = calibrate_pool(game, tc.pool, cfg.calibration_games, derive_seed(cfg.seed, 3, 0), 1000.0,
                                    cfg.workers);
    auto pool_out = open_output(dir / "pool.txt");
    pool_out << "member rating";
    for (const auto& m : tc.pool) pool_out << " " << m.name;
    pool_out << "\n";
    for (std::size_t i = 0; i < tc.pool.size(); ++i) {
      pool_out << tc.pool[i].name << " " << format_double(cal.ratings[i]);
      for (double s : cal.scores[i]) pool_out << " " << format_double(s);
      pool_out << "\n";
    }
    if (cfg.rating_games > 0) {
      const auto probe = search_agent<G>("learner", tc.initial, learner_search<G>(tc.update, tc.squash), tc.epsilon);
      tc.rating.rating = establish_rating(game, probe, tc.pool, cfg.rating_games, tc.seed, cfg.workers);
      pool_out << "learner_start " << format_double(tc.rating.rating) << "\n";
    }
  }
  if (cfg.dump_trajectories) {
    tc.on_game = [&](std::size_t index, const GameRecord<G>& rec) {
      for (const auto* traj : {&rec.trajectory_a, &rec.trajectory_b}) {
        if (!*traj) continue;
        std::ostringstream name;
        name << "game_" << std::setw(6) << std::setfill('0') << index << (traj == &rec.trajectory_a ? "a" : "b")
             << ".txt";
        auto f = open_output(dir / "trajectories" / name.str());
        write_trajectory(f, game, game.id(), **traj, game.feature_count());
      }
    };
  }

  const auto result = train(game, tc);

  {
    auto csv = open_output(dir / "learning_curve.csv");
    write_curve_csv(csv, result.curve);
  }
  for (const auto& snap : result.snapshots)
    save_weight_file(game, dir / "snapshots" / (snap.id + ".weights"), snap.weights, tc.squash);
  save_weight_file(game, dir / "final.weights", result.weights, tc.squash);
  {
    auto report = open_output(dir / "report.txt");
    report << "game " << game.id() << "\n";
    report << "regime " << (cfg.regime == Regime::Pool ? "pool" : "self-play") << "\n";
    report << "seed " << cfg.seed << "\n";
    report << "games_played " << result.games_played << "\n";
    report << "pool_games " << result.pool_games << "\n";
    report << "rating " << format_double(result.rating.rating) << "\n";
    report << "rating_sigma " << format_double(result.rating.sigma) << "\n";
    report << "diverged " << (result.diverged ? "yes" : "no") << "\n";
    if (result.diverged) report << "diagnostic " << result.diagnostic << "\n";
    const auto names = game.feature_names();
    for (std::size_t i = 0; i < names.size(); ++i)
      report << "weight " << names[i] << " " << format_double(result.weights[i]) << "\n";
  }
  {
    auto archived = open_output(dir / "config.ini");
    write_config(archived, cfg);
  }

  out << "trained " << result.games_played << " games; rating " << format_double(result.rating.rating)
      << "; outputs in " << dir.string() << "\n";
  if (result.diverged) {
    err << "divergence: " << result.diagnostic << "\n";
    return kDivergence;
  }
  return kOk;
}

// ------------------------------------------------------------------- match

template <PlayableGame G>
int match_command(const G& game, const ExperimentConfig& cfg, const fs::path& base, std::ostream& out) {
  const auto a = match_agent(game, cfg.agent_a, cfg.depth_a, base);
  const auto b = match_agent(game, cfg.agent_b, cfg.depth_b, base);
  const auto before_a = a.weights ? weights_hash(*a.weights) : 0;
  const auto before_b = b.weights ? weights_hash(*b.weights) : 0;
  const auto m = run_match(game, a, b, cfg.match_games, cfg.seed, cfg.workers);
  if ((a.weights && weights_hash(*a.weights) != before_a) || (b.weights && weights_hash(*b.weights) != before_b))
    throw Error("fixed agent weights changed during the match");
  auto f = open_output(fs::path(cfg.output) / "match.txt");
  write_match_report(f, m);
  out << m.agent_a << " " << format_double(m.points_a) << " - " << format_double(m.points_b) << " " << m.agent_b
      << " over " << m.games << " games\n";
  return kOk;
}

// ------------------------------------------------------------ disagreement

template <PlayableGame G>
int disagreement_command(const G& game, const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.depth1 == cfg.depth2) throw ConfigError("depth2: must differ from depth1");
  const auto w = initial_weights(game, cfg);
  const auto squash = squash_config(cfg);
  const double rate =
      disagreement_rate(game, w, squash, cfg.sample_positions, cfg.depth1, cfg.depth2, cfg.seed);
  const auto deep = search_agent<G>("depth" + std::to_string(cfg.depth2), w, default_search<G>(cfg.depth2, squash));
  const auto shallow =
      search_agent<G>("depth" + std::to_string(cfg.depth1), w, default_search<G>(cfg.depth1, squash));
  const auto m = run_match(game, deep, shallow, cfg.match_games, derive_seed(cfg.seed, 5, 0), cfg.workers);
  const double delta = (m.points_a - m.points_b) / static_cast<double>(m.games);

  auto f = open_output(fs::path(cfg.output) / "disagreement.txt");
  f << "game " << game.id() << "\n";
  f << "seed " << cfg.seed << "\n";
  f << "positions " << cfg.sample_positions << "\n";
  f << "depths " << cfg.depth1 << " " << cfg.depth2 << "\n";
  f << "disagreement " << format_double(rate) << "\n";
  f << "match_games " << m.games << "\n";
  f << "points_deep " << format_double(m.points_a) << "\n";
  f << "points_shallow " << format_double(m.points_b) << "\n";
  f << "points_per_game_delta " << format_double(delta) << "\n";
  out << "disagreement " << format_double(rate) << "\n";
  out << "points_per_game_delta " << format_double(delta) << "\n";
  return kOk;
}

// ------------------------------------------------------------------ verify

inline int verify_command(const std::string& suite, std::size_t positions, std::size_t samples, std::uint64_t seed,
                          int max_depth, std::ostream& out) {
  verify::SuiteReport r;
  if (suite == "figure1") r = verify::figure1();
  else if (suite == "gradcheck") r = verify::gradcheck(samples, seed);
  else if (suite == "search-oracle") r = verify::search_oracle(positions, seed, max_depth);
  else if (suite == "td-oracle") r = verify::td_oracle(seed);
  else throw ConfigError("unknown suite '" + suite + "'");
  verify::print(out, suite, r);
  out << (r.passed() ? "all properties hold\n" : "verification failed\n");
  return r.passed() ? kOk : kVerification;
}

// --------------------------------------------------------------- dispatch

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"TD(lambda), TD-directed(lambda) and TDLeaf(lambda) experiments", "tdleaf"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  std::uint64_t seed = 1;
  std::string out_dir;
  int workers = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the config)");
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads (overrides the config)")
                          ->check(CLI::PositiveNumber);

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "Train a learner from a config file");
  train_cmd->add_option("config", config_path, "Experiment config")->required();
  auto* match_cmd = app.add_subcommand("match", "Play a fixed-weight match from a config file");
  match_cmd->add_option("config", config_path, "Experiment config")->required();
  auto* dis_cmd = app.add_subcommand("disagreement", "Depth disagreement rate and paired match");
  dis_cmd->add_option("config", config_path, "Experiment config")->required();

  std::string suite;
  std::size_t positions = 1000, samples = 1000;
  int max_depth = 6;
  auto* verify_cmd = app.add_subcommand("verify", "Run a verification suite");
  verify_cmd->add_option("suite", suite, "figure1 | gradcheck | search-oracle | td-oracle")
      ->required()
      ->check(CLI::IsMember({"figure1", "gradcheck", "search-oracle", "td-oracle"}));
  verify_cmd->add_option("--positions", positions, "Positions per game for search-oracle");
  verify_cmd->add_option("--samples", samples, "(state, weights) pairs per game for gradcheck");
  verify_cmd->add_option("--max-depth", max_depth, "Deepest search for search-oracle")->check(CLI::Range(1, 12));

  std::string game_id = "tictactoe", state_text;
  std::size_t cap = ExactSolver<games::TicTacToe>::kDefaultCap;
  auto* solve_cmd = app.add_subcommand("solve", "Exact game-theoretic value of a position");
  solve_cmd->add_option("--game", game_id, "Game id")->check(CLI::IsMember(known_games()));
  solve_cmd->add_option("--state", state_text, "Serialized state (default: initial position)");
  solve_cmd->add_option("--cap", cap, "State cap for the memoized solver");

  bool squash_on = true;
  double step = 1e-6;
  auto* grad_cmd = app.add_subcommand("grad-check", "Analytic vs finite-difference evaluation gradients");
  grad_cmd->add_option("--game", game_id, "Game id")->check(CLI::IsMember(known_games()));
  grad_cmd->add_option("--samples", samples, "Random (state, weights) pairs");
  grad_cmd->add_option("--squash", squash_on, "tanh squashing on|off");
  grad_cmd->add_option("--step", step, "Finite-difference step")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }
  if (*seed_opt) o.seed = seed;
  if (*out_opt) o.out = out_dir;
  if (*workers_opt) o.workers = workers;

  try {
    if (*train_cmd || *match_cmd || *dis_cmd) {
      const auto cfg = load_config(config_path, o);
      return with_game(cfg.game, [&](const auto& game) {
        if (*train_cmd) return train_command(game, cfg, out, err);
        if (*match_cmd) return match_command(game, cfg, fs::path(config_path).parent_path(), out);
        return disagreement_command(game, cfg, out);
      });
    }
    if (*verify_cmd) return verify_command(suite, positions, samples, o.seed.value_or(1), max_depth, out);
    if (*solve_cmd) {
      return with_game(game_id, [&](const auto& game) {
        using G = std::decay_t<decltype(game)>;
        const auto s = state_text.empty() ? game.initial(Side::Learner, game.opening_events().front())
                                          : game.parse(state_text);
        ExactSolver<G> solver(game, cap);
        const double v = solver.value(s);
        out << "value " << format_double(v) << "\n";
        if (!game.is_terminal(s)) out << "best " << game.action_name(solver.best_action(s)) << "\n";
        out << "states " << solver.states_solved() << "\n";
        return static_cast<int>(kOk);
      });
    }
    if (*grad_cmd) {
      return with_game(game_id, [&](const auto& game) {
        const SquashConfig squash{squash_on, kDefaultBeta};
        std::mt19937_64 rng(derive_seed(o.seed.value_or(1), 10, 0));
        double worst = 0.0;
        for (const auto& s : sample_positions(game, samples, o.seed.value_or(1)))
          worst = std::max(worst, grad_check(game, s, verify::random_weights(game.feature_count(), rng), squash, step));
        out << "max relative error " << format_double(worst) << " over " << samples << " samples\n";
        return static_cast<int>(worst <= 1e-6 ? kOk : kVerification);
      });
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace tdleaf::cli
