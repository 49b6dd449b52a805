#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tdleaf/tdleaf.hpp"

namespace tdleaf {
namespace {

using games::DiceRace;
using games::ExplicitTree;
using games::Minichess;
using games::TicTacToe;

ParamVector random_w(std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> w(k);
  for (auto& x : w) x = u(rng);
  return ParamVector(std::move(w));
}

TEST(Evaluate, ZeroWeightsGiveZeroValueAndFeatureGradient) {
  const Minichess game;
  const ParamVector w(std::vector<double>(8, 0.0));
  for (const auto& s : sample_positions(game, 50, 3)) {
    const auto e = evaluate(game, s, w);
    EXPECT_EQ(e.value, 0.0);
    EXPECT_EQ(e.gradient, game.features(s));
  }
}

TEST(Evaluate, TerminalWinIgnoresWeights) {
  const TicTacToe game;
  const auto s = game.parse("xxxoo....:x");
  for (const auto& w : {ParamVector({0, 0, 0, 0}), ParamVector({5, -3, 2, 1})}) {
    for (bool squash : {false, true}) {
      const auto e = evaluate(game, s, w, {squash, kDefaultBeta});
      EXPECT_EQ(e.value, 1.0);
      EXPECT_EQ(e.gradient, std::vector<double>(4, 0.0));
    }
  }
}

TEST(Evaluate, SquashedValueAndGradient) {
  ExplicitTree tree(2);
  const int x = tree.add_node("x", Side::Learner, {1.0, 2.0});
  tree.add_edge(x, tree.add_terminal("end", 0.0));
  const ParamVector w({0.1, 0.2});  // w . f = 0.5
  const SquashConfig squash{true, 1.0};
  const auto e = evaluate(tree, x, w, squash);
  const double t = std::tanh(0.5);
  EXPECT_DOUBLE_EQ(e.value, t);
  EXPECT_DOUBLE_EQ(e.gradient[0], (1 - t * t) * 1.0);
  EXPECT_DOUBLE_EQ(e.gradient[1], (1 - t * t) * 2.0);
  EXPECT_LE(grad_check(tree, x, w, squash, 1e-6), 1e-6);
}

TEST(Evaluate, DefaultBetaMapsOnePawnToAQuarter) {
  EXPECT_NEAR(std::tanh(kDefaultBeta), 0.25, 1e-15);
}

TEST(Evaluate, DimensionMismatchThrows) {
  const TicTacToe game;
  EXPECT_THROW(evaluate(game, game.initial(Side::Learner), ParamVector({1.0, 2.0})), Error);
}

// Central differences of a linear function are exact up to cancellation,
// which at step h costs about eps*|v|/h.
TEST(GradCheck, LinearEvaluatorIsExactToRounding) {
  const Minichess game;
  std::mt19937_64 rng(1);
  for (const auto& s : sample_positions(game, 200, 1)) {
    const auto w = random_w(8, rng);
    EXPECT_LE(grad_check(game, s, w, {}, 1e-2), 1e-10);
    EXPECT_LE(grad_check(game, s, w, {}, 1e-6), 1e-8);
  }
}

TEST(GradCheck, SquashedEvaluatorWithinTolerance) {
  std::mt19937_64 rng(2);
  const DiceRace game;
  for (const auto& s : sample_positions(game, 500, 2))
    EXPECT_LE(grad_check(game, s, random_w(4, rng), {true, kDefaultBeta}, 1e-6), 1e-6);
  const TicTacToe ttt;
  for (const auto& s : sample_positions(ttt, 500, 2))
    EXPECT_LE(grad_check(ttt, s, random_w(4, rng), {true, kDefaultBeta}, 1e-6), 1e-6);
}

TEST(GradCheck, ZeroFeatureVector) {
  const TicTacToe game;
  EXPECT_EQ(grad_check(game, game.initial(Side::Learner), ParamVector({0.3, -0.2, 0.5, 1.0}), {true, 1.0}), 0.0);
  EXPECT_THROW(grad_check(game, game.initial(Side::Learner), ParamVector({0, 0, 0, 0}), {}, 0.0), Error);
}

TEST(Evaluate, SquashBoundAndTerminalGradients) {
  std::mt19937_64 rng(3);
  const Minichess game;
  for (const auto& s : sample_positions(game, 300, 4)) {
    std::vector<double> big(8);
    for (auto& x : big) x = std::uniform_real_distribution<double>(-3, 3)(rng);
    const auto e = evaluate(game, s, ParamVector(big), {true, kDefaultBeta});
    if (game.is_terminal(s)) {
      EXPECT_EQ(e.gradient, std::vector<double>(8, 0.0));
    } else {
      EXPECT_LT(std::abs(e.value), 1.0);
    }
  }
}

TEST(Evaluate, LinearInWeightsWithoutSquash) {
  std::mt19937_64 rng(4);
  const Minichess game;
  for (const auto& s : sample_positions(game, 300, 5)) {
    if (game.is_terminal(s)) continue;
    const auto w1 = random_w(8, rng), w2 = random_w(8, rng);
    const double a = std::uniform_real_distribution<double>(-2, 2)(rng);
    const double b = std::uniform_real_distribution<double>(-2, 2)(rng);
    std::vector<double> mix(8);
    for (int i = 0; i < 8; ++i) mix[i] = a * w1[i] + b * w2[i];
    const double lhs = evaluate(game, s, ParamVector(mix)).value;
    const double rhs = a * evaluate(game, s, w1).value + b * evaluate(game, s, w2).value;
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(MaterialInit, PieceValues) {
  const Minichess game;
  EXPECT_EQ(material_init(game).values, (std::vector<double>{1, 4, 4, 6, 12, 0, 0, 0}));
  EXPECT_EQ(pawn_equal_init(game).values, std::vector<double>(8, 1.0));
  EXPECT_THROW(material_init(TicTacToe{}), Error);
  EXPECT_THROW(pawn_equal_init(DiceRace{}), Error);
}

TEST(WeightFile, RoundTripsBitForBit) {
  const Minichess game;
  std::mt19937_64 rng(6);
  WeightFile file{"minichess", game.feature_names(), random_w(8, rng), {true, kDefaultBeta}};
  file.weights.updates = 17;
  std::stringstream io;
  write_weights(io, file);
  const auto text = io.str();
  EXPECT_EQ(read_weights(io), file);
  EXPECT_EQ(text.substr(0, text.find('\n')), "tdleaf-weights 1");
}

TEST(WeightFile, RejectsMalformedInput) {
  for (const std::string bad : {"", "tdleaf-weights 2\n", "tdleaf-weights 1\ngame x\nk 1\nsquash maybe 1\n",
                                "tdleaf-weights 1\ngame x\nk 1\nsquash on -1\nupdates 0\nw 1\n",
                                "tdleaf-weights 1\ngame x\nk 2\nsquash on 1\nupdates 0\nw 1\n",
                                "tdleaf-weights 1\ngame x\nk 1\nsquash on 1\nupdates 0\nw nan\n",
                                "tdleaf-weights 1\ngame x\nk 1\nsquash on 1\nupdates 0\nw 1.5x\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_weights(in), Error) << bad;
  }
}

}  // namespace
}  // namespace tdleaf
