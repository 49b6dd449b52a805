// Elo-style rating surrogate used to track a learner against a pool of
// fixed opponents whose ratings are calibrated by a round-robin.

#pragma once

#include <cmath>
#include <vector>

#include "tdleaf/core.hpp"

namespace tdleaf {

inline double expected_score(double rating, double opponent_rating) {
  return 1.0 / (1.0 + std::pow(10.0, (opponent_rating - rating) / 400.0));
}

// sigma is 1/sqrt(prior precision + Fisher information of the games so far),
// so it shrinks monotonically with every game.
struct RatingTrack {
  double rating = 1500.0;
  double sigma = 350.0;
  double prior_sigma = 350.0;
  double information = 0.0;
  double k_factor = 32.0;
  std::size_t games = 0;
};

inline RatingTrack rating_update(const RatingTrack& track, double result, double opponent_rating) {
  if (result != 0.0 && result != 0.5 && result != 1.0) throw Error("rating result must be 0, 0.5 or 1");
  constexpr double kScale = 0.0057564627324851142;  // ln(10) / 400
  RatingTrack next = track;
  const double e = expected_score(track.rating, opponent_rating);
  next.rating = track.rating + track.k_factor * (result - e);
  next.information = track.information + kScale * kScale * e * (1.0 - e);
  next.sigma = 1.0 / std::sqrt(1.0 / (track.prior_sigma * track.prior_sigma) + next.information);
  ++next.games;
  return next;
}

// Bradley-Terry fit of Elo ratings to a round-robin. points[i][j] is the
// score of i against j over games[i][j] games. One virtual draw per pair
// keeps ratings finite when a pairing is a whitewash. Member 0 is pinned at
// `anchor`.
inline std::vector<double> fit_ratings(const std::vector<std::vector<double>>& points,
                                       const std::vector<std::vector<double>>& games,
                                       double anchor = 1000.0) {
  const std::size_t n = points.size();
  std::vector<double> gamma(n, 1.0);
  for (int iter = 0; iter < 5000; ++iter) {
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      double wins = 0.0, denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double played = games[i][j] + 1.0;
        wins += points[i][j] + 0.5;
        denom += played / (gamma[i] + gamma[j]);
      }
      next[i] = wins / denom;
    }
    const double norm = next[0];
    for (auto& g : next) g /= norm;
    gamma = std::move(next);
  }
  std::vector<double> ratings(n);
  for (std::size_t i = 0; i < n; ++i) ratings[i] = anchor + 400.0 * std::log10(gamma[i]);
  return ratings;
}

// Maximum-likelihood rating of one player against opponents of known
// rating, with the same one-virtual-draw-per-opponent prior as fit_ratings.
inline double fit_rating_against(const std::vector<double>& points, const std::vector<double>& games,
                                 const std::vector<double>& opponent_ratings) {
  double target = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) target += points[j] + 0.5;
  double lo = -10000.0, hi = 10000.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double expected = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j)
      expected += (games[j] + 1.0) * expected_score(mid, opponent_ratings[j]);
    (expected < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace tdleaf
