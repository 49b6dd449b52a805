// Game playing, training regimes, fixed-weight matches and move-disagreement
// measurement.
//
// Games are played in a canonical frame in which agent A holds the Learner
// seat. Agent B always sees the mirrored position, so every agent evaluates
// and records positions from its own perspective.
//
// Random streams: each game draws from two mt19937_64 engines seeded by
// derive_seed(master, stream, index): stream 0 drives agent decisions
// (exploration, random and noisy-optimal agents), stream 1 drives chance
// events. In matches on stochastic games, games 2i and 2i+1 share the chance
// seed with sides swapped.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "tdleaf/core.hpp"
#include "tdleaf/eval.hpp"
#include "tdleaf/rating.hpp"
#include "tdleaf/search.hpp"
#include "tdleaf/solver.hpp"
#include "tdleaf/td.hpp"

namespace tdleaf {

inline std::uint64_t derive_seed(std::uint64_t master, std::uint32_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32), stream,
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

inline std::uint64_t weights_hash(const ParamVector& w) {
  std::string text;
  for (double x : w.values) text += format_double(x) + ";";
  return stable_hash(text);
}

enum class AgentKind { Search, Random, Optimal };

template <PlayableGame G>
struct AgentSpec {
  std::string name = "agent";
  AgentKind kind = AgentKind::Search;
  std::shared_ptr<ParamVector> weights;     // Search agents
  SearchConfig search;                      // Search agents
  double epsilon = 0.0;                     // chance of a uniformly random move
  bool learning = false;
  std::shared_ptr<ExactSolver<G>> solver;   // Optimal agents
  double rating = 1500.0;                   // calibrated rating of a pool member
};

template <PlayableGame G>
AgentSpec<G> random_agent(std::string name = "random") {
  AgentSpec<G> a;
  a.name = std::move(name);
  a.kind = AgentKind::Random;
  return a;
}

template <PlayableGame G>
AgentSpec<G> search_agent(std::string name, ParamVector w, SearchConfig cfg, double epsilon = 0.0,
                          bool learning = false) {
  AgentSpec<G> a;
  a.name = std::move(name);
  a.kind = AgentKind::Search;
  a.weights = std::make_shared<ParamVector>(std::move(w));
  a.search = cfg;
  a.epsilon = epsilon;
  a.learning = learning;
  return a;
}

// Plays solver-optimal moves, or a random move with probability epsilon.
template <PlayableGame G>
AgentSpec<G> optimal_agent(std::string name, std::shared_ptr<ExactSolver<G>> solver, double error_rate) {
  AgentSpec<G> a;
  a.name = std::move(name);
  a.kind = AgentKind::Optimal;
  a.solver = std::move(solver);
  a.epsilon = error_rate;
  return a;
}

template <PlayableGame G>
SearchConfig default_search(int depth, SquashConfig squash = {}) {
  SearchConfig cfg;
  cfg.depth = depth;
  cfg.pruning = Pruning::AlphaBeta;
  cfg.chance = G::kStochastic ? ChanceHandling::Expectiminimax : ChanceHandling::Forbid;
  cfg.squash = squash;
  return cfg;
}

template <PlayableGame G>
struct GameRecord {
  std::vector<Move<typename G::Action>> moves;
  ChanceEvent opening = kUnitEvent;
  bool a_first = true;
  Reward result_a = 0.0;
  std::optional<GameTrajectory<G>> trajectory_a;
  std::optional<GameTrajectory<G>> trajectory_b;
  typename G::State final_state{};
};

namespace detail {

template <typename Rng>
ChanceEvent sample_event(const std::vector<ChanceEvent>& events, Rng& rng) {
  if (events.size() == 1) return events.front();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  for (const auto& e : events) {
    if (x < e.probability) return e;
    x -= e.probability;
  }
  return events.back();
}

template <PlayableGame G>
struct Decision {
  typename G::Action action{};
  std::optional<SearchResult<G>> search;
};

// `view` is the position from the agent's own perspective.
template <PlayableGame G, typename Rng>
Decision<G> decide(const G& game, const AgentSpec<G>& agent, const typename G::State& view, Rng& rng) {
  const auto actions = game.legal_actions(view);
  if (actions.empty()) throw Error("agent " + agent.name + " asked to move in terminal state");
  std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
  Decision<G> d;
  switch (agent.kind) {
    case AgentKind::Random:
      d.action = actions[pick(rng)];
      return d;
    case AgentKind::Optimal: {
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      if (agent.epsilon > 0.0 && coin(rng) < agent.epsilon)
        d.action = actions[pick(rng)];
      else
        d.action = agent.solver->best_action(view);
      return d;
    }
    case AgentKind::Search: break;
  }
  if (agent.learning) d.search = search(game, view, *agent.weights, agent.search);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (agent.epsilon > 0.0 && coin(rng) < agent.epsilon) {
    d.action = actions[pick(rng)];
  } else if (actions.size() == 1) {
    d.action = actions.front();
  } else if (d.search && !d.search->pv.empty()) {
    d.action = d.search->pv.front().action;
  } else {
    SearchConfig c = agent.search;
    c.depth = std::max(1, c.depth);
    d.action = search(game, view, *agent.weights, c).pv.front().action;
  }
  return d;
}

template <PlayableGame G>
TrajectoryRecord<G> make_record(const G& game, const AgentSpec<G>& agent, const typename G::State& view,
                                std::size_t ply, std::optional<SearchResult<G>> result) {
  TrajectoryRecord<G> r;
  r.move_index = ply;
  r.root = view;
  r.root_eval = evaluate(game, view, *agent.weights, agent.search.squash);
  r.search = result ? std::move(result) : search(game, view, *agent.weights, agent.search);
  return r;
}

}  // namespace detail

// Plays one game from the initial position. `a_first` puts agent A on the
// move first. Trajectories are recorded only for learning agents.
template <PlayableGame G>
GameRecord<G> play_game(const G& game, const AgentSpec<G>& a, const AgentSpec<G>& b, bool a_first,
                        std::uint64_t agent_seed, std::uint64_t chance_seed,
                        TrajectoryPositions positions = TrajectoryPositions::LearnerMoves) {
  std::mt19937_64 agent_rng(agent_seed), chance_rng(chance_seed);
  GameRecord<G> rec;
  rec.a_first = a_first;
  rec.opening = detail::sample_event(game.opening_events(), chance_rng);
  auto state = game.initial(a_first ? Side::Learner : Side::Opponent, rec.opening);
  if (a.learning) rec.trajectory_a.emplace();
  if (b.learning) rec.trajectory_b.emplace();

  for (std::size_t ply = 0; !game.is_terminal(state); ++ply) {
    const bool a_moves = game.side_to_move(state) == Side::Learner;
    const auto& mover = a_moves ? a : b;
    const auto view = a_moves ? state : game.mirror(state);
    auto decision = detail::decide(game, mover, view, agent_rng);

    const auto legal = game.legal_actions(view);
    if (std::find(legal.begin(), legal.end(), decision.action) == legal.end())
      throw Error("agent " + mover.name + " chose illegal action " + game.action_name(decision.action));

    if (a.learning && (a_moves || positions == TrajectoryPositions::All))
      rec.trajectory_a->records.push_back(
          detail::make_record(game, a, state, ply, a_moves ? decision.search : std::nullopt));
    if (b.learning && (!a_moves || positions == TrajectoryPositions::All))
      rec.trajectory_b->records.push_back(
          detail::make_record(game, b, game.mirror(state), ply, a_moves ? std::nullopt : decision.search));

    const auto event = detail::sample_event(game.chance_events(state, decision.action), chance_rng);
    state = game.apply(state, decision.action, event);
    rec.moves.push_back({decision.action, event});
  }
  rec.result_a = game.terminal_reward(state);
  if (rec.trajectory_a) rec.trajectory_a->reward = rec.result_a;
  if (rec.trajectory_b) rec.trajectory_b->reward = game.terminal_reward(game.mirror(state));
  rec.final_state = state;
  return rec;
}

// Replays a recorded game and returns its final position.
template <PlayableGame G>
typename G::State replay(const G& game, bool a_first, const ChanceEvent& opening,
                         const std::vector<Move<typename G::Action>>& moves) {
  auto state = game.initial(a_first ? Side::Learner : Side::Opponent, opening);
  for (const auto& m : moves) state = game.apply(state, m.action, m.event);
  return state;
}

inline double score_of(Reward r) { return r > 0 ? 1.0 : r < 0 ? 0.0 : 0.5; }

struct MatchGame {
  std::size_t index = 0;
  std::uint64_t agent_seed = 0;
  std::uint64_t chance_seed = 0;
  bool a_first = true;
  double result_a = 0.0;
  std::string opening;
  std::vector<std::string> moves;
};

struct MatchRecord {
  std::string game;
  std::string agent_a;
  std::string agent_b;
  std::uint64_t seed = 0;
  std::size_t games = 0;
  std::size_t a_wins = 0, draws = 0, b_wins = 0;
  double points_a = 0.0, points_b = 0.0;
  std::vector<MatchGame> records;
};

namespace detail {

// Runs body(i) for i in [0, n) over `workers` threads.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Fixed-weight match. A moves first in even-numbered games.
template <PlayableGame G>
MatchRecord run_match(const G& game, const AgentSpec<G>& a, const AgentSpec<G>& b, std::size_t games,
                      std::uint64_t seed, int workers = 1) {
  if (a.learning || b.learning) throw Error("run_match requires learning-off agents");
  MatchRecord m;
  m.game = std::string(game.id());
  m.agent_a = a.name;
  m.agent_b = b.name;
  m.seed = seed;
  m.games = games;
  m.records.resize(games);
  detail::parallel_for(games, workers, [&](std::size_t i) {
    MatchGame& g = m.records[i];
    g.index = i;
    g.a_first = i % 2 == 0;
    g.agent_seed = derive_seed(seed, 0, i);
    g.chance_seed = derive_seed(seed, 1, G::kStochastic ? i / 2 : i);
    const auto rec = play_game(game, a, b, g.a_first, g.agent_seed, g.chance_seed);
    g.result_a = rec.result_a;
    g.opening = event_name(rec.opening);
    for (const auto& mv : rec.moves) g.moves.push_back(move_name(game, mv));
  });
  for (const auto& g : m.records) {
    const double s = score_of(g.result_a);
    m.points_a += s;
    m.points_b += 1.0 - s;
    if (s == 1.0) ++m.a_wins;
    else if (s == 0.0) ++m.b_wins;
    else ++m.draws;
  }
  return m;
}

// Match report: a summary block followed by one record per game holding the
// game id, seeds, players and the newline-delimited move names.
inline void write_match_report(std::ostream& out, const MatchRecord& m) {
  out << "tdleaf-match 1\n";
  out << "game " << m.game << "\n";
  out << "agent_a " << m.agent_a << "\n";
  out << "agent_b " << m.agent_b << "\n";
  out << "seed " << m.seed << "\n";
  out << "games " << m.games << "\n";
  out << "a_wins " << m.a_wins << "\ndraws " << m.draws << "\nb_wins " << m.b_wins << "\n";
  out << "points_a " << format_double(m.points_a) << "\n";
  out << "points_b " << format_double(m.points_b) << "\n";
  for (const auto& g : m.records) {
    out << "\n# game " << g.index << "\n";
    out << "game " << m.game << "\n";
    out << "seed " << g.agent_seed << " " << g.chance_seed << "\n";
    out << "players " << (g.a_first ? m.agent_a : m.agent_b) << " " << (g.a_first ? m.agent_b : m.agent_a)
        << "\n";
    out << "opening " << g.opening << "\n";
    out << "result_a " << format_double(g.result_a) << "\n";
    for (const auto& mv : g.moves) out << mv << "\n";
  }
}

enum class Regime { SelfPlay, Pool };

template <PlayableGame G>
struct TrainConfig {
  Regime regime = Regime::Pool;
  std::size_t games = 100;
  UpdateConfig update;
  SquashConfig squash{true, kDefaultBeta};
  double epsilon = G::kStochastic ? 0.0 : 0.05;
  ParamVector initial;
  std::vector<AgentSpec<G>> pool;
  std::uint64_t seed = 1;
  std::size_t snapshot_interval = 0;  // 0 disables snapshots
  double divergence_bound = 1e6;
  int workers = 1;
  RatingTrack rating;
  // Called after every game with the trajectories that were applied.
  std::function<void(std::size_t, const GameRecord<G>&)> on_game;
};

struct CurvePoint {
  std::size_t game_index = 0;
  double rating = 0.0;
  double rating_sigma = 0.0;
  double result = 0.0;
  std::string snapshot_id;
};

struct Snapshot {
  std::string id;
  ParamVector weights;
};

struct TrainResult {
  ParamVector weights;
  RatingTrack rating;
  std::vector<CurvePoint> curve;
  std::vector<Snapshot> snapshots;
  std::size_t games_played = 0;
  std::size_t pool_games = 0;
  bool diverged = false;
  std::string diagnostic;
};

// Search used by the learner while playing: one ply for plain TD, the
// configured depth for TD-directed and TDLeaf.
template <PlayableGame G>
SearchConfig learner_search(const UpdateConfig& update, const SquashConfig& squash) {
  return default_search<G>(update.algorithm == Algorithm::TD ? 1 : update.depth, squash);
}

template <PlayableGame G>
TrainResult train(const G& game, const TrainConfig<G>& cfg) {
  validate(cfg.update);
  validate(cfg.squash);
  if (cfg.games < 1) throw Error("training needs at least one game");
  if (cfg.initial.size() != game.feature_count()) throw Error("initial weights do not match the feature count");
  if (cfg.regime == Regime::Pool && cfg.pool.empty()) throw Error("pool regime with an empty opponent pool");
  for (const auto& member : cfg.pool)
    if (member.learning) throw Error("pool member " + member.name + " must not learn");

  TrainResult out;
  out.weights = cfg.initial;
  out.rating = cfg.rating;
  auto weights = std::make_shared<ParamVector>(cfg.initial);
  auto learner = search_agent<G>("learner", cfg.initial, learner_search<G>(cfg.update, cfg.squash), cfg.epsilon, true);
  learner.weights = weights;
  std::string last_snapshot;

  const int workers = std::max(1, cfg.workers);
  for (std::size_t start = 0; start < cfg.games && !out.diverged; start += workers) {
    const std::size_t batch = std::min<std::size_t>(workers, cfg.games - start);
    struct Played {
      std::size_t index;
      GameRecord<G> record;
      const AgentSpec<G>* opponent;
    };
    std::vector<Played> done;
    std::mutex done_mu;
    // Games in a batch run against the same frozen weights; updates are
    // applied in game order.
    detail::parallel_for(batch, workers, [&](std::size_t j) {
      const std::size_t g = start + j;
      const AgentSpec<G>* opponent = nullptr;
      bool a_first = g % 2 == 0;
      if (cfg.regime == Regime::Pool) {
        opponent = &cfg.pool[g % cfg.pool.size()];
        a_first = (g / cfg.pool.size()) % 2 == 0;
      }
      auto rec = play_game(game, learner, opponent ? *opponent : learner, a_first, derive_seed(cfg.seed, 0, g),
                           derive_seed(cfg.seed, 1, g), cfg.update.positions);
      std::lock_guard lock(done_mu);
      done.push_back({g, std::move(rec), opponent});
    });

    std::sort(done.begin(), done.end(), [](const Played& x, const Played& y) { return x.index < y.index; });
    for (auto& p : done) {
      const double alpha = alpha_for_game(cfg.update, p.index + 1);
      try {
        std::vector<UpdateReport> reports;
        for (const auto* traj : {&p.record.trajectory_a, &p.record.trajectory_b})
          if (*traj && !(*traj)->records.empty())
            reports.push_back(compute_update(**traj, *weights, cfg.update, alpha));
        for (const auto& r : reports) apply_update(*weights, r);
      } catch (const Error& e) {
        out.diverged = true;
        out.diagnostic = "game " + std::to_string(p.index) + ": " + e.what();
      }
      if (!out.diverged)
        for (std::size_t i = 0; i < weights->size(); ++i)
          if (std::abs((*weights)[i]) > cfg.divergence_bound) {
            out.diverged = true;
            out.diagnostic = "game " + std::to_string(p.index) + ": weight " + std::to_string(i) + " = " +
                             format_double((*weights)[i]) + " exceeds divergence bound " +
                             format_double(cfg.divergence_bound);
            break;
          }

      const double result = score_of(p.record.result_a);
      const double opponent_rating = p.opponent ? p.opponent->rating : out.rating.rating;
      out.rating = rating_update(out.rating, result, opponent_rating);
      if (p.opponent) ++out.pool_games;
      ++out.games_played;
      if (cfg.snapshot_interval > 0 && out.games_played % cfg.snapshot_interval == 0) {
        last_snapshot = "w" + std::to_string(out.games_played);
        out.snapshots.push_back({last_snapshot, *weights});
      }
      out.curve.push_back({p.index, out.rating.rating, out.rating.sigma, result, last_snapshot});
      if (cfg.on_game) cfg.on_game(p.index, p.record);
      if (out.diverged) break;
    }
  }
  out.weights = *weights;
  return out;
}

// Learning curve CSV.
inline void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "game_index,rating,rating_sigma,result,weight_snapshot_id\n";
  for (const auto& p : curve)
    out << p.game_index << "," << format_double(p.rating) << "," << format_double(p.rating_sigma) << ","
        << format_double(p.result) << "," << p.snapshot_id << "\n";
}

// Positions reached by uniformly random playouts to a random ply in
// [0, max_plies], seen from the side to move. A playout that ends before its
// target ply is redrawn with a new target; after 64 failures the last
// non-terminal position is kept.
template <PlayableGame G>
std::vector<typename G::State> sample_positions(const G& game, std::size_t count, std::uint64_t seed,
                                                std::size_t max_plies = 40) {
  std::vector<typename G::State> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, 2, i));
    std::optional<typename G::State> kept;
    for (int attempt = 0; attempt < 64 && !kept; ++attempt) {
      const bool learner_first = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
      auto state = game.initial(learner_first ? Side::Learner : Side::Opponent,
                                detail::sample_event(game.opening_events(), rng));
      const std::size_t plies = std::uniform_int_distribution<std::size_t>(0, max_plies)(rng);
      bool reached = true;
      for (std::size_t p = 0; p < plies; ++p) {
        const auto actions = game.legal_actions(state);
        const auto a = actions[std::uniform_int_distribution<std::size_t>(0, actions.size() - 1)(rng)];
        const auto next = game.apply(state, a, detail::sample_event(game.chance_events(state, a), rng));
        if (game.is_terminal(next)) {
          reached = false;
          break;
        }
        state = next;
      }
      if (reached || attempt == 63) kept = state;
    }
    if (game.side_to_move(*kept) == Side::Opponent) kept = game.mirror(*kept);
    out.push_back(*kept);
  }
  return out;
}

template <PlayableGame G>
double disagreement_rate_on(const G& game, const std::vector<typename G::State>& positions, const ParamVector& w,
                            const SearchConfig& first, const SearchConfig& second) {
  if (positions.empty()) return 0.0;
  std::size_t differ = 0;
  for (const auto& s : positions)
    if (!(select_action(game, s, w, first) == select_action(game, s, w, second))) ++differ;
  return static_cast<double>(differ) / static_cast<double>(positions.size());
}

// Fraction of sampled positions where searches to depth d1 and d2 recommend
// different moves.
template <PlayableGame G>
double disagreement_rate(const G& game, const ParamVector& w, const SquashConfig& squash, std::size_t positions,
                         int d1, int d2, std::uint64_t seed) {
  if (d1 == d2) return 0.0;
  return disagreement_rate_on(game, sample_positions(game, positions, seed), w, default_search<G>(d1, squash),
                              default_search<G>(d2, squash));
}

// Graded fixed pool: random, depth-1 and depth-3 searchers on the game's
// reference weights, and a noisy exact player when a solver is supplied.
template <PlayableGame G>
std::vector<AgentSpec<G>> graded_pool(const G& game, std::shared_ptr<ExactSolver<G>> solver = nullptr,
                                      double solver_error = 0.2) {
  std::vector<AgentSpec<G>> pool;
  pool.push_back(random_agent<G>("random"));
  ParamVector ref(game.reference_weights());
  pool.push_back(search_agent<G>("depth1", ref, default_search<G>(1, SquashConfig{true, kDefaultBeta}), 0.1));
  pool.push_back(search_agent<G>("depth3", ref, default_search<G>(3, SquashConfig{true, kDefaultBeta}), 0.1));
  if (solver) pool.push_back(optimal_agent<G>("optimal", std::move(solver), solver_error));
  return pool;
}

struct PoolCalibration {
  std::vector<double> ratings;
  std::vector<std::vector<double>> scores;  // mean score of i against j
};

// Round-robin among pool members followed by a Bradley-Terry fit; the
// fitted ratings are written back into the pool.
template <PlayableGame G>
PoolCalibration calibrate_pool(const G& game, std::vector<AgentSpec<G>>& pool, std::size_t games_per_pair,
                               std::uint64_t seed, double anchor = 1000.0, int workers = 1) {
  const std::size_t n = pool.size();
  std::vector<std::vector<double>> points(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> played(n, std::vector<double>(n, 0.0));
  std::uint64_t pair = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++pair) {
      const auto m = run_match(game, pool[i], pool[j], games_per_pair, derive_seed(seed, 3, pair), workers);
      points[i][j] = m.points_a;
      points[j][i] = m.points_b;
      played[i][j] = played[j][i] = static_cast<double>(games_per_pair);
    }
  PoolCalibration cal;
  cal.ratings = fit_ratings(points, played, anchor);
  cal.scores.assign(n, std::vector<double>(n, 0.5));
  for (std::size_t i = 0; i < n; ++i) {
    pool[i].rating = cal.ratings[i];
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && played[i][j] > 0) cal.scores[i][j] = points[i][j] / played[i][j];
  }
  return cal;
}

// Rating of a fixed agent from games against every member of a calibrated
// pool, before any learning.
template <PlayableGame G>
double establish_rating(const G& game, const AgentSpec<G>& agent, const std::vector<AgentSpec<G>>& pool,
                        std::size_t games_per_member, std::uint64_t seed, int workers = 1) {
  std::vector<double> points, games, ratings;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const auto m = run_match(game, agent, pool[j], games_per_member, derive_seed(seed, 4, j), workers);
    points.push_back(m.points_a);
    games.push_back(static_cast<double>(games_per_member));
    ratings.push_back(pool[j].rating);
  }
  return fit_rating_against(points, games, ratings);
}

}  // namespace tdleaf
