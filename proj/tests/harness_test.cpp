#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "tdleaf/tdleaf.hpp"

namespace tdleaf {
namespace {

using games::Connect4;
using games::DiceRace;
using games::Minichess;
using games::TicTacToe;

const SquashConfig kSquash{true, kDefaultBeta};

TEST(Seeds, DerivedStreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint32_t stream = 0; stream < 4; ++stream)
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(42, stream, i));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(42, 1, 7), derive_seed(42, 1, 7));
  EXPECT_NE(derive_seed(42, 1, 7), derive_seed(43, 1, 7));
}

TEST(PlayGame, OptimalPlayersDrawTicTacToe) {
  const TicTacToe game;
  auto solver = std::make_shared<ExactSolver<TicTacToe>>(game);
  const auto a = optimal_agent<TicTacToe>("a", solver, 0.0);
  const auto b = optimal_agent<TicTacToe>("b", solver, 0.0);
  for (bool a_first : {true, false}) {
    const auto rec = play_game(game, a, b, a_first, 1, 2);
    EXPECT_EQ(rec.result_a, 0.0);
    EXPECT_EQ(rec.moves.size(), 9u);
  }
}

TEST(PlayGame, RandomGamesReplayIdentically) {
  const DiceRace game;
  const auto r = random_agent<DiceRace>();
  const auto first = play_game(game, r, r, true, 11, 12);
  const auto second = play_game(game, r, r, true, 11, 12);
  EXPECT_EQ(first.moves, second.moves);
  EXPECT_EQ(first.result_a, second.result_a);
  const auto other = play_game(game, r, r, true, 11, 13);
  EXPECT_NE(first.moves, other.moves);
}

template <typename G>
void check_conservation(const G& game, const AgentSpec<G>& a, const AgentSpec<G>& b, std::size_t games) {
  for (std::size_t i = 0; i < games; ++i) {
    const auto rec = play_game(game, a, b, i % 2 == 0, derive_seed(5, 0, i), derive_seed(5, 1, i));
    const auto end = replay(game, rec.a_first, rec.opening, rec.moves);
    ASSERT_TRUE(game.is_terminal(end));
    EXPECT_EQ(game.serialize(end), game.serialize(rec.final_state));
    EXPECT_EQ(game.terminal_reward(end), rec.result_a);
    if (rec.trajectory_a) {
      EXPECT_EQ(rec.trajectory_a->reward, rec.result_a);
      for (const auto& r : rec.trajectory_a->records) EXPECT_EQ(game.side_to_move(r.root), Side::Learner);
    }
  }
}

TEST(PlayGame, MoveListsReplayToRecordedOutcome) {
  const Minichess chess;
  check_conservation(chess, search_agent<Minichess>("m", material_init(chess), default_search<Minichess>(1, kSquash),
                                                    0.1, true),
                     random_agent<Minichess>(), 20);
  const DiceRace dice;
  check_conservation(dice, search_agent<DiceRace>("d", ParamVector(dice.reference_weights()),
                                                  default_search<DiceRace>(1, kSquash), 0.0, true),
                     random_agent<DiceRace>(), 40);
}

// Frozen regression bound for the material searcher.
TEST(RunMatch, MaterialSearcherBeatsRandomAtMinichess) {
  const Minichess game;
  const auto strong = search_agent<Minichess>("material-d2", material_init(game), default_search<Minichess>(2, kSquash));
  const auto m = run_match(game, strong, random_agent<Minichess>(), 200, 3);
  EXPECT_GT(m.points_a / 200.0, 0.6) << m.points_a;
}

TEST(RunMatch, SelfMatchIsSymmetric) {
  const Connect4 game;
  const auto a = search_agent<Connect4>("c4", ParamVector(game.reference_weights()), default_search<Connect4>(2, kSquash));
  const auto m = run_match(game, a, a, 10, 4);
  EXPECT_EQ(m.points_a, 5.0);
  EXPECT_EQ(m.points_b, 5.0);
  for (const auto& g : m.records) {
    EXPECT_EQ(g.moves, m.records.front().moves);
    EXPECT_EQ(g.result_a, g.a_first ? m.records[0].result_a : -m.records[0].result_a);
  }
}

TEST(RunMatch, ConservationAndImmutability) {
  const DiceRace game;
  const auto a = search_agent<DiceRace>("ref", ParamVector(game.reference_weights()), default_search<DiceRace>(1, kSquash));
  const auto b = random_agent<DiceRace>();
  const auto before = weights_hash(*a.weights);
  const auto m = run_match(game, a, b, 60, 5, 2);
  EXPECT_EQ(weights_hash(*a.weights), before);
  EXPECT_EQ(m.points_a + m.points_b, 60.0);
  EXPECT_EQ(m.a_wins + m.draws + m.b_wins, 60u);
  double sum = 0.0;
  for (const auto& g : m.records) sum += score_of(g.result_a);
  EXPECT_EQ(sum, m.points_a);
  // Paired games share a dice stream with sides swapped.
  for (std::size_t i = 0; i + 1 < m.records.size(); i += 2) {
    EXPECT_EQ(m.records[i].chance_seed, m.records[i + 1].chance_seed);
    EXPECT_NE(m.records[i].a_first, m.records[i + 1].a_first);
  }
  auto learner = a;
  learner.learning = true;
  EXPECT_THROW(run_match(game, learner, b, 2, 5), Error);
}

TEST(RunMatch, ParallelWorkersGiveTheSameRecord) {
  const TicTacToe game;
  const auto a = search_agent<TicTacToe>("ttt", ParamVector(game.reference_weights()), default_search<TicTacToe>(2, kSquash), 0.2);
  const auto b = random_agent<TicTacToe>();
  std::ostringstream one, many;
  write_match_report(one, run_match(game, a, b, 40, 6, 1));
  write_match_report(many, run_match(game, a, b, 40, 6, 3));
  EXPECT_EQ(one.str(), many.str());
}

TrainConfig<TicTacToe> small_train(Regime regime, std::uint64_t seed) {
  const TicTacToe game;
  TrainConfig<TicTacToe> cfg;
  cfg.regime = regime;
  cfg.games = 40;
  cfg.update.depth = 2;
  cfg.initial = ParamVector(std::vector<double>(4, 0.0));
  cfg.seed = seed;
  cfg.snapshot_interval = 10;
  cfg.rating.rating = 1000.0;
  if (regime == Regime::Pool) cfg.pool = graded_pool(game);
  return cfg;
}

TEST(Train, ZeroLearningRateKeepsWeights) {
  auto cfg = small_train(Regime::Pool, 1);
  cfg.initial = ParamVector({0.3, -0.2, 0.1, 0.4});
  cfg.update.alpha = 0.0;
  const auto r = train(TicTacToe{}, cfg);
  EXPECT_EQ(r.weights.values, cfg.initial.values);
  EXPECT_FALSE(r.diverged);
  EXPECT_EQ(r.games_played, 40u);
}

TEST(Train, ReproducibleFromSeed) {
  for (int workers : {1, 2}) {
    auto cfg = small_train(Regime::Pool, 2);
    cfg.workers = workers;
    const auto a = train(TicTacToe{}, cfg);
    const auto b = train(TicTacToe{}, cfg);
    std::ostringstream ca, cb;
    write_curve_csv(ca, a.curve);
    write_curve_csv(cb, b.curve);
    EXPECT_EQ(ca.str(), cb.str());
    EXPECT_EQ(a.weights, b.weights);
    ASSERT_EQ(a.snapshots.size(), 4u);
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) EXPECT_EQ(a.snapshots[i].weights, b.snapshots[i].weights);
  }
  const auto c = train(TicTacToe{}, small_train(Regime::Pool, 3));
  EXPECT_NE(c.weights, train(TicTacToe{}, small_train(Regime::Pool, 2)).weights);
}

TEST(Train, RegimeIsolation) {
  auto pool_cfg = small_train(Regime::Pool, 4);
  std::vector<std::uint64_t> hashes;
  for (const auto& m : pool_cfg.pool)
    if (m.weights) hashes.push_back(weights_hash(*m.weights));
  std::size_t learner_sides = 0;
  pool_cfg.on_game = [&](std::size_t, const GameRecord<TicTacToe>& rec) {
    learner_sides += rec.trajectory_a.has_value() + rec.trajectory_b.has_value();
  };
  const auto pooled = train(TicTacToe{}, pool_cfg);
  EXPECT_EQ(learner_sides, 40u);
  EXPECT_EQ(pooled.pool_games, 40u);
  std::size_t k = 0;
  for (const auto& m : pool_cfg.pool)
    if (m.weights) {
      EXPECT_EQ(weights_hash(*m.weights), hashes[k++]);
    }

  // Self-play with a pool member that cannot be played: never touched.
  auto self_cfg = small_train(Regime::SelfPlay, 4);
  AgentSpec<TicTacToe> broken;
  broken.name = "broken";
  self_cfg.pool.push_back(broken);
  learner_sides = 0;
  self_cfg.on_game = [&](std::size_t, const GameRecord<TicTacToe>& rec) {
    learner_sides += rec.trajectory_a.has_value() + rec.trajectory_b.has_value();
  };
  const auto selfplay = train(TicTacToe{}, self_cfg);
  EXPECT_EQ(learner_sides, 80u);
  EXPECT_EQ(selfplay.pool_games, 0u);

  auto learning_member = small_train(Regime::Pool, 4);
  learning_member.pool[0].learning = true;
  EXPECT_THROW(train(TicTacToe{}, learning_member), Error);
}

TEST(Train, DivergenceHaltsWithPartialOutputs) {
  auto cfg = small_train(Regime::Pool, 5);
  cfg.initial = ParamVector({0.3, -0.2, 0.1, 0.4});
  cfg.update.alpha = 1e3;
  cfg.squash.enabled = false;
  cfg.divergence_bound = 10.0;
  const auto r = train(TicTacToe{}, cfg);
  ASSERT_TRUE(r.diverged);
  EXPECT_LT(r.games_played, 40u);
  EXPECT_EQ(r.curve.size(), r.games_played);
  EXPECT_NE(r.diagnostic.find("divergence bound"), std::string::npos) << r.diagnostic;
}

TEST(Train, Validation) {
  auto cfg = small_train(Regime::Pool, 6);
  cfg.games = 0;
  EXPECT_THROW(train(TicTacToe{}, cfg), Error);
  cfg = small_train(Regime::Pool, 6);
  cfg.pool.clear();
  EXPECT_THROW(train(TicTacToe{}, cfg), Error);
  cfg = small_train(Regime::Pool, 6);
  cfg.update.lambda = 1.3;
  EXPECT_THROW(train(TicTacToe{}, cfg), Error);
  cfg = small_train(Regime::Pool, 6);
  cfg.initial = ParamVector({1.0});
  EXPECT_THROW(train(TicTacToe{}, cfg), Error);
}

TEST(Rating, Examples) {
  RatingTrack t;
  t.rating = 1500.0;
  EXPECT_DOUBLE_EQ(rating_update(t, 1.0, 1500.0).rating, 1516.0);
  EXPECT_EQ(rating_update(t, 0.5, 1500.0).rating, 1500.0);
  EXPECT_THROW(rating_update(t, 0.7, 1500.0), Error);
  double sigma = t.sigma;
  for (int i = 0; i < 50; ++i) {
    t = rating_update(t, i % 3 == 0 ? 1.0 : 0.0, 1400.0 + 10 * i);
    EXPECT_LT(t.sigma, sigma);
    EXPECT_TRUE(std::isfinite(t.rating));
    sigma = t.sigma;
  }
  EXPECT_EQ(t.games, 50u);
}

TEST(Rating, BradleyTerryRecoversLogisticScores) {
  // Scores generated from ratings 1000/1200/1400 with many games.
  const std::vector<double> truth{1000, 1200, 1400};
  std::vector<std::vector<double>> points(3, std::vector<double>(3, 0.0)), games = points;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) {
        games[i][j] = 1e6;
        points[i][j] = 1e6 * expected_score(truth[i], truth[j]);
      }
  const auto fit = fit_ratings(points, games);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(fit[i], truth[i], 0.5);
}

TEST(Calibration, PoolScoresMatchLogisticExpectation) {
  const TicTacToe game;
  auto pool = graded_pool(game, std::make_shared<ExactSolver<TicTacToe>>(game));
  const auto cal = calibrate_pool(game, pool, 400, 7);
  EXPECT_EQ(cal.ratings[0], 1000.0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    EXPECT_EQ(pool[i].rating, cal.ratings[i]);
    for (std::size_t j = 0; j < pool.size(); ++j)
      if (i != j) {
        EXPECT_NEAR(cal.scores[i][j], expected_score(cal.ratings[i], cal.ratings[j]), 0.05)
            << pool[i].name << " vs " << pool[j].name;
      }
  }
}

TEST(Disagreement, TrivialCases) {
  const DiceRace game;
  const ParamVector w(game.reference_weights());
  EXPECT_EQ(disagreement_rate(game, w, kSquash, 200, 2, 2, 1), 0.0);
  const TicTacToe ttt;
  const std::vector<TicTacToe::State> forced(20, ttt.parse("xoxxooox.:x"));
  EXPECT_EQ(disagreement_rate_on(ttt, forced, ParamVector(ttt.reference_weights()), default_search<TicTacToe>(1),
                                 default_search<TicTacToe>(3)),
            0.0);
  const double rate = disagreement_rate(game, w, kSquash, 300, 1, 2, 1);
  EXPECT_GE(rate, 0.0);
  EXPECT_LE(rate, 1.0);
  EXPECT_EQ(rate, disagreement_rate(game, w, kSquash, 300, 1, 2, 1));
}

TEST(LearningCurve, CsvHeader) {
  std::ostringstream out;
  write_curve_csv(out, {{3, 1016.0, 340.5, 1.0, "w10"}});
  EXPECT_EQ(out.str(), "game_index,rating,rating_sigma,result,weight_snapshot_id\n3,1016,340.5,1,w10\n");
}

TEST(SamplePositions, LearnerToMoveAndDeterministic) {
  const Connect4 game;
  const auto a = sample_positions(game, 200, 9);
  const auto b = sample_positions(game, 200, 9);
  EXPECT_EQ(a, b);
  std::size_t terminal = 0;
  for (const auto& s : a) {
    EXPECT_EQ(game.side_to_move(s), Side::Learner);
    terminal += game.is_terminal(s);
  }
  EXPECT_EQ(terminal, 0u);
}

}  // namespace
}  // namespace tdleaf
