#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "cot2el/core/error.hpp"
#include "cot2el/core/types.hpp"

namespace cot2el {

/// Values closer than this are treated as tied when ranking.
inline constexpr double kTieTolerance = 1e-12;

/// Fractional ranks: larger value -> smaller (better) rank, tied blocks share
/// the mean of the positions they span.
inline Ranking rank_descending(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && std::abs(values[order[i]] - values[order[j]]) <= kTieTolerance) ++j;
    // positions i+1 .. j (1-based)
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return Ranking(std::move(ranks));
}

/// Same as rank_descending but smaller value is better (used to re-rank averaged ranks).
inline Ranking rank_ascending(std::span<const double> values) {
  std::vector<double> neg(values.begin(), values.end());
  for (double& v : neg) v = -v;
  return rank_descending(neg);
}

inline Ranking ranking_from_distribution(const Distribution& d) { return rank_descending(d.values()); }

inline Ranking ranking_from_scores(const ScoreVector& s) { return rank_descending(s.values()); }

/// Unweighted mean of the per-source probability vectors, renormalized.
inline Distribution aggregate_gold_distribution(const Instance& inst) {
  if (inst.gold.kind != GoldAnnotation::Kind::DistributionSources)
    throw ValidationError("instance " + inst.id + " has no distribution gold");
  const auto& sources = inst.gold.distribution_sources;
  if (sources.empty()) throw ValidationError("instance " + inst.id + " has zero distribution sources");
  std::vector<double> mean(inst.size(), 0.0);
  for (const auto& src : sources) {
    if (src.probs.size() != mean.size())
      throw ValidationError("source " + src.name + " length differs from option count");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += src.probs[i];
  }
  for (double& v : mean) v /= static_cast<double>(sources.size());
  return Distribution::normalize(std::move(mean));
}

/// Per-option mean Likert rating.
inline ScoreVector aggregate_gold_scores(const Instance& inst) {
  if (inst.gold.kind != GoldAnnotation::Kind::LikertScores)
    throw ValidationError("instance " + inst.id + " has no Likert gold");
  std::vector<double> means;
  means.reserve(inst.gold.likert.size());
  for (std::size_t i = 0; i < inst.gold.likert.size(); ++i) {
    const auto& ratings = inst.gold.likert[i];
    if (ratings.empty()) throw ValidationError("instance " + inst.id + ": empty rating list for option " + std::string(1, inst.options.at(i).letter));
    double sum = 0.0;
    for (int r : ratings) sum += r;
    means.push_back(sum / static_cast<double>(ratings.size()));
  }
  return ScoreVector(std::move(means));
}

/// Gold ranking for either annotation kind.
inline Ranking gold_ranking(const Instance& inst) {
  if (inst.gold.kind == GoldAnnotation::Kind::DistributionSources)
    return ranking_from_distribution(aggregate_gold_distribution(inst));
  return ranking_from_scores(aggregate_gold_scores(inst));
}

}  // namespace cot2el
