// Acceptance criteria 1-10. `acceptance N` runs criterion N and prints one
// line; with no argument every criterion runs. Exit status is 0 iff every
// criterion that ran passed.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "cli.hpp"

namespace tdleaf::acceptance {
namespace {

using games::Connect4;
using games::DiceRace;
using games::Minichess;
using games::TicTacToe;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 20260101;
const SquashConfig kSquash{true, kDefaultBeta};

struct Result {
  bool passed = false;
  std::string summary;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * x);
  return buf;
}

std::string failed_checks(const verify::SuiteReport& r) {
  std::string out;
  for (const auto& c : r.checks)
    if (!c.passed) out += (out.empty() ? "" : "; ") + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
  return out.empty() ? "all checks pass" : out;
}

// ------------------------------------------------------------------ 1

Result criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = verify::figure1();
  const double secs = seconds_since(start);
  return {r.passed() && secs < 1.0, "figure-1 tree: root 4, PV A>C>F>L, root gradient = leaf-L gradient",
          failed_checks(r) + ", " + format_double(secs) + " s"};
}

// ------------------------------------------------------------------ 2

Result criterion2() {
  std::string detail;
  bool ok = true;
  auto one = [&](const auto& game, bool negamax) {
    const auto st = verify::search_oracle_stats(game, 1000, kSeed, 6, negamax);
    ok &= st.positions == 1000 && st.mismatches == 0 && st.oracle_mismatches == 0;
    detail += std::string(game.id()) + " " + std::to_string(st.mismatches) + "/" + std::to_string(st.positions) +
              (negamax ? " (negamax " + std::to_string(st.oracle_mismatches) + ")" : "") + "; ";
  };
  one(TicTacToe{}, true);
  one(Connect4{}, true);
  one(Minichess{}, false);
  const auto ex = verify::expectimax_oracle_stats(DiceRace{}, 500, kSeed, 2);
  ok &= ex.positions == 500 && ex.max_error <= 1e-12;
  detail += "dice-race max error " + format_double(ex.max_error);
  return {ok, "alpha-beta = minimax at depths 1-6 on 1000 positions per game; expectiminimax = brute force",
          "mismatches " + detail};
}

// ------------------------------------------------------------------ 3

Result criterion3() {
  const auto r = verify::gradcheck(1000, kSeed);
  std::string detail;
  for (const auto& c : r.checks) detail += c.name + " [" + c.detail + "]; ";
  return {r.passed(), "analytic gradients within 1e-6, search gradients within 1e-5 on 1000 pairs", detail};
}

// ------------------------------------------------------------------ 4

Result criterion4() {
  const auto r = verify::td_oracle(kSeed);
  return {r.passed(), "TD algebra: lambda sums, closed forms, TD(1) = gradient descent, TDLeaf(d=0) = TD",
          failed_checks(r)};
}

// ------------------------------------------------------------------ 5

// Every reachable tic-tac-toe position: the optimal move keeps the exact
// value. Dice race (short track): the chance-weighted mean of J* after the
// optimal move equals J* before it.
Result criterion5() {
  const TicTacToe ttt;
  ExactSolver<TicTacToe> solver(ttt);
  std::size_t positions = 0, broken = 0;
  std::map<std::string, bool> seen;
  std::function<void(const TicTacToe::State&)> walk = [&](const TicTacToe::State& s) {
    if (ttt.is_terminal(s) || !seen.emplace(ttt.serialize(s), true).second) return;
    ++positions;
    if (solver.value(ttt.apply(s, solver.best_action(s))) != solver.value(s)) ++broken;
    for (const auto& a : ttt.legal_actions(s)) walk(ttt.apply(s, a));
  };
  walk(ttt.initial(Side::Learner));
  walk(ttt.initial(Side::Opponent));

  const DiceRace dice(6, 2, 40);
  ExactSolver<DiceRace> dsolver(dice);
  double worst = 0.0;
  const auto sampled = sample_positions(dice, 2000, kSeed);
  for (const auto& s : sampled) {
    const auto a = dsolver.best_action(s);
    double mean = 0.0;
    for (const auto& e : dice.chance_events(s, a)) mean += e.probability * dsolver.value(dice.apply(s, a, e));
    worst = std::max(worst, std::abs(mean - dsolver.value(s)));
  }
  return {broken == 0 && worst <= 1e-12, "optimal-play martingale: J* constant on optimal lines",
          "tictactoe " + std::to_string(broken) + " violations over " + std::to_string(positions) +
              " positions; dice-race max |E d_t| " + format_double(worst) + " over " + std::to_string(sampled.size()) +
              " positions"};
}

// ------------------------------------------------------------------ 6

Result criterion6() {
  const auto start = std::chrono::steady_clock::now();
  const TicTacToe game;
  TrainConfig<TicTacToe> cfg;
  cfg.regime = Regime::Pool;
  cfg.games = 2000;
  cfg.update.algorithm = Algorithm::TDLeaf;
  cfg.update.lambda = 0.7;
  cfg.update.alpha = 1.0;
  cfg.update.depth = 2;
  cfg.initial = ParamVector(std::vector<double>(4, 0.0));
  cfg.seed = kSeed;
  cfg.rating.rating = 1000.0;
  cfg.pool = graded_pool(game, std::make_shared<ExactSolver<TicTacToe>>(game));
  calibrate_pool(game, cfg.pool, 100, derive_seed(kSeed, 3, 0));
  const auto trained = train(game, cfg);
  const auto agent = search_agent<TicTacToe>("trained", trained.weights, default_search<TicTacToe>(2, kSquash));
  const auto m = run_match(game, agent, random_agent<TicTacToe>(), 1000, derive_seed(kSeed, 5, 6));
  const double non_loss = static_cast<double>(m.a_wins + m.draws) / m.games;
  const auto untrained = search_agent<TicTacToe>("untrained", cfg.initial, default_search<TicTacToe>(2, kSquash));
  const auto base = run_match(game, untrained, random_agent<TicTacToe>(), 1000, derive_seed(kSeed, 5, 6));
  const double secs = seconds_since(start);
  std::string w;
  for (double x : trained.weights.values) w += (w.empty() ? "" : " ") + format_double(x);
  return {!trained.diverged && non_loss >= 0.95 && secs < 600.0,
          "tictactoe TDLeaf(0.7) d=2 vs pool, 2000 games: non-loss vs random >= 95%",
          "non-loss " + pct(non_loss) + " (" + std::to_string(m.a_wins) + "W " + std::to_string(m.draws) + "D " +
              std::to_string(m.b_wins) + "L); untrained start " +
              pct(static_cast<double>(base.a_wins + base.draws) / base.games) + "; weights [" + w + "], " +
              format_double(secs) + " s"};
}

// ------------------------------------------------------------------ 7

constexpr std::size_t kInitGames = 300;

// Games until the learner's rating first reaches the threshold: 0 if the
// established starting rating already does, kInitGames + 1 if it never does.
std::size_t games_to_threshold(const TrainResult& r, double start, double threshold) {
  if (start >= threshold) return 0;
  for (std::size_t i = 0; i < r.curve.size(); ++i)
    if (r.curve[i].rating >= threshold) return i + 1;
  return kInitGames + 1;
}

Result criterion7() {
  const Minichess game;
  auto pool = graded_pool(game);
  const auto cal = calibrate_pool(game, pool, 40, derive_seed(kSeed, 3, 7));
  // The depth-3 reference searcher.
  const double threshold = cal.ratings[2];
  int material_wins = 0;
  std::string detail = "threshold " + format_double(std::round(threshold)) +
                       "; start rating and games to threshold (material/pawn):";
  for (std::uint64_t run = 0; run < 5; ++run) {
    std::size_t reached[2];
    double start[2];
    for (int init = 0; init < 2; ++init) {
      TrainConfig<Minichess> cfg;
      cfg.regime = Regime::Pool;
      cfg.games = kInitGames;
      cfg.update.depth = 2;
      cfg.initial = init == 0 ? material_init(game) : pawn_equal_init(game);
      cfg.pool = pool;
      cfg.seed = derive_seed(kSeed, 7, run);
      const auto probe = search_agent<Minichess>("probe", cfg.initial, default_search<Minichess>(2, kSquash), 0.05);
      start[init] = establish_rating(game, probe, pool, 25, cfg.seed);
      cfg.rating.rating = start[init];
      reached[init] = games_to_threshold(train(game, cfg), start[init], threshold);
    }
    material_wins += reached[0] < reached[1];
    auto show = [](std::size_t n) { return n > kInitGames ? std::string("never") : std::to_string(n); };
    detail += " " + format_double(std::round(start[0])) + ":" + show(reached[0]) + "/" +
              format_double(std::round(start[1])) + ":" + show(reached[1]);
  }
  return {material_wins >= 4, "minichess: material init reaches the rating threshold first in >= 4 of 5 runs",
          detail + "; material first in " + std::to_string(material_wins) + "/5"};
}

// ------------------------------------------------------------------ 8

Result criterion8() {
  const Minichess game;
  auto pool = graded_pool(game);
  calibrate_pool(game, pool, 40, derive_seed(kSeed, 3, 8));
  auto trained = [&](Regime regime) {
    TrainConfig<Minichess> cfg;
    cfg.regime = regime;
    cfg.games = 300;
    cfg.update.depth = 2;
    cfg.initial = material_init(game);
    if (regime == Regime::Pool) cfg.pool = pool;
    cfg.seed = derive_seed(kSeed, 8, 0);
    cfg.rating.rating = 1000.0;
    return train(game, cfg).weights;
  };
  const auto pooled = search_agent<Minichess>("pool-trained", trained(Regime::Pool), default_search<Minichess>(2, kSquash));
  const auto selfplay =
      search_agent<Minichess>("self-play-trained", trained(Regime::SelfPlay), default_search<Minichess>(2, kSquash));
  const auto m = run_match(game, pooled, selfplay, 100, derive_seed(kSeed, 5, 8));
  bool complete = m.records.size() == 100 && m.points_a + m.points_b == 100.0;
  for (const auto& g : m.records) complete &= !g.moves.empty();
  std::ostringstream report;
  write_match_report(report, m);
  complete &= report.str().find("# game 99") != std::string::npos;
  return {complete, "minichess pool-trained vs self-play-trained 100-game match record (outcome non-gating)",
          "pool-trained " + format_double(m.points_a) + " - " + format_double(m.points_b) + " self-play-trained" +
              (m.points_a >= m.points_b ? " (pool >= self-play, as expected)" : " (self-play ahead; not gating)")};
}

// ------------------------------------------------------------------ 9

struct CliRun {
  int code;
  std::string out;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tdleaf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str() + err.str()};
}

double field(const std::string& text, const std::string& key) {
  const auto at = text.find(key + " ");
  if (at == std::string::npos) return std::nan("");
  return std::stod(text.substr(at + key.size() + 1));
}

Result criterion9() {
  const fs::path config = fs::path(TDLEAF_SOURCE_DIR) / "experiments" / "dice-race-disagreement.ini";
  const fs::path scratch = fs::temp_directory_path() / "tdleaf_acceptance_9";
  fs::remove_all(scratch);
  std::vector<double> rates, deltas;
  std::string detail;
  bool ok = true;
  for (const std::string seed : {"1", "2", "3", "1"}) {
    const auto r = run_cli({"--seed", seed, "--out", (scratch / ("seed" + seed)).string(), "disagreement",
                            config.string()});
    ok &= r.code == 0;
    rates.push_back(field(r.out, "disagreement"));
    deltas.push_back(field(r.out, "points_per_game_delta"));
    detail += "seed " + seed + ": " + pct(rates.back()) + " delta " + format_double(deltas.back()) + "; ";
  }
  const double spread = *std::max_element(rates.begin(), rates.end()) - *std::min_element(rates.begin(), rates.end());
  ok &= spread <= 0.02 && rates[0] == rates[3];
  return {ok, "dice-race depth-1 vs depth-2 disagreement pipeline, seed-stable within 2 points",
          detail + "spread " + pct(spread) +
              ". Not reproduced at this scale: the 1650->2110 and 1260->1540 rating climbs, the 0.25 "
              "points-per-game two-ply advantage and the 24% disagreement with the original weights"};
}

// ------------------------------------------------------------------ 10

Result criterion10() {
  const fs::path scratch = fs::temp_directory_path() / "tdleaf_acceptance_10";
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  const fs::path train_cfg = fs::path(TDLEAF_SOURCE_DIR) / "experiments" / "reproducibility.ini";
  bool ok = true;
  std::string detail;
  for (const std::string run : {"a", "b"}) {
    ok &= run_cli({"--out", (scratch / run).string(), "train", train_cfg.string()}).code == 0;
    // Identical config text in each run directory; the weight file is found
    // relative to it.
    std::ofstream(scratch / run / "match.ini")
        << "[experiment]\ngame = minichess\nseed = 4\n[match]\nagent_a = final.weights"
        << "\nagent_b = reference\ndepth_a = 2\ndepth_b = 1\ngames = 20\n";
    ok &= run_cli({"--out", (scratch / run / "match").string(), "match", (scratch / run / "match.ini").string()})
              .code == 0;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::size_t files = 0, differ = 0;
  for (const auto& entry : fs::recursive_directory_iterator(scratch / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), scratch / "a");
    std::string ext = rel.extension().string();
    if (ext != ".csv" && ext != ".weights" && ext != ".txt") continue;
    ++files;
    if (slurp(entry.path()) != slurp(scratch / "b" / rel)) {
      ++differ;
      detail += " differs: " + rel.string();
    }
  }
  ok &= files >= 4 && differ == 0;
  return {ok, "train and match reruns with the same seed are byte-identical",
          std::to_string(files) + " files compared, " + std::to_string(differ) + " differ" + detail};
}

}  // namespace
}  // namespace tdleaf::acceptance

int main(int argc, char** argv) {
  using namespace tdleaf::acceptance;
  const std::vector<std::function<Result()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                      criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> which;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 10) {
      std::cerr << "usage: acceptance [1-10]\n";
      return 2;
    }
    which.push_back(n);
  } else {
    for (int n = 1; n <= 10; ++n) which.push_back(n);
  }
  bool all = true;
  for (int n : which) {
    Result r;
    try {
      r = criteria[n - 1]();
    } catch (const std::exception& e) {
      r = {false, "criterion raised an error", e.what()};
    }
    std::cout << "criterion " << n << ": " << (r.passed ? "PASS" : "FAIL") << " " << r.summary << " [" << r.detail
              << "]" << std::endl;
    all &= r.passed;
  }
  return all ? 0 : 1;
}
