#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cot2el/core/error.hpp"
#include "cot2el/core/gold.hpp"
#include "cot2el/core/types.hpp"

namespace cot2el {

enum class KendallVariant { TauA, TauB };

inline constexpr double kSmoothingEpsilon = 1e-10;

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

inline int sign(double x) {
  if (std::abs(x) <= kTieTolerance) return 0;
  return x > 0 ? 1 : -1;
}

inline std::vector<double> smooth(std::span<const double> p) {
  std::vector<double> out(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : out) sum += (v += kSmoothingEpsilon);
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace detail

/// Tau-a is (C - D) / (n(n-1)/2); tau-b divides by sqrt((n0 - n1)(n0 - n2)) to
/// correct for ties and is undefined when either side is constant.
inline double kendall_tau(std::span<const double> a, std::span<const double> b,
                          KendallVariant variant = KendallVariant::TauB) {
  detail::require_same_length(a.size(), b.size(), "kendall_tau");
  const std::size_t n = a.size();
  if (n < 2) throw ValidationError("kendall_tau needs at least 2 items");
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int sa = detail::sign(a[i] - a[j]);
      const int sb = detail::sign(b[i] - b[j]);
      if (sa == 0) ++ties_a;
      if (sb == 0) ++ties_b;
      if (sa * sb > 0) ++concordant;
      else if (sa * sb < 0) ++discordant;
    }
  }
  const double n0 = static_cast<double>(n * (n - 1) / 2);
  const double num = static_cast<double>(concordant - discordant);
  if (variant == KendallVariant::TauA) return num / n0;
  const double denom = std::sqrt((n0 - static_cast<double>(ties_a)) * (n0 - static_cast<double>(ties_b)));
  if (denom == 0.0) throw ValidationError("undefined correlation: constant ranking");
  return num / denom;
}

inline double kendall_tau(const Ranking& a, const Ranking& b, KendallVariant variant = KendallVariant::TauB) {
  return kendall_tau(a.ranks(), b.ranks(), variant);
}

/// Pearson correlation of the (already fractional) rank vectors.
inline double spearman_rho(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "spearman_rho");
  const std::size_t n = a.size();
  if (n < 2) throw ValidationError("spearman_rho needs at least 2 items");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) ma += a[i], mb += b[i];
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= kTieTolerance || sbb <= kTieTolerance) throw ValidationError("undefined correlation: constant ranking");
  return sab / std::sqrt(saa * sbb);
}

inline double spearman_rho(const Ranking& a, const Ranking& b) { return spearman_rho(a.ranks(), b.ranks()); }

/// KL(p || q), natural log, both sides smoothed by epsilon and renormalized.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  detail::require_same_length(p.size(), q.size(), "kl_divergence");
  const auto ps = detail::smooth(p);
  const auto qs = detail::smooth(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) kl += ps[i] * std::log(ps[i] / qs[i]);
  return kl;
}

inline double kl_divergence(const Distribution& p, const Distribution& q) { return kl_divergence(p.values(), q.values()); }

/// Jensen-Shannon distance with base-2 logs, in [0, 1]. Zero-probability terms
/// contribute nothing, so no smoothing is needed (M is positive wherever P or Q is).
inline double js_distance(std::span<const double> p, std::span<const double> q) {
  detail::require_same_length(p.size(), q.size(), "js_distance");
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    const double tp = p[i] > 0.0 ? p[i] * std::log2(p[i] / m) : 0.0;
    const double tq = q[i] > 0.0 ? q[i] * std::log2(q[i] / m) : 0.0;
    js += 0.5 * (tp + tq);
  }
  return std::sqrt(std::clamp(js, 0.0, 1.0));
}

inline double js_distance(const Distribution& p, const Distribution& q) { return js_distance(p.values(), q.values()); }

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  detail::require_same_length(p.size(), q.size(), "total_variation");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

inline double total_variation(const Distribution& p, const Distribution& q) {
  return total_variation(p.values(), q.values());
}

inline double rmse(std::span<const double> pred, std::span<const double> gold) {
  detail::require_same_length(pred.size(), gold.size(), "rmse");
  if (pred.empty()) throw ValidationError("rmse of an empty sample");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - gold[i]) * (pred[i] - gold[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

inline double mae(std::span<const double> pred, std::span<const double> gold) {
  detail::require_same_length(pred.size(), gold.size(), "mae");
  if (pred.empty()) throw ValidationError("mae of an empty sample");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - gold[i]);
  return s / static_cast<double>(pred.size());
}

/// 1 - SS_res / SS_tot around the gold mean; negative when worse than the mean.
inline double r_squared(std::span<const double> pred, std::span<const double> gold) {
  detail::require_same_length(pred.size(), gold.size(), "r_squared");
  if (pred.empty()) throw ValidationError("r_squared of an empty sample");
  double mean = 0.0;
  for (double g : gold) mean += g;
  mean /= static_cast<double>(gold.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ss_res += (gold[i] - pred[i]) * (gold[i] - pred[i]);
    ss_tot += (gold[i] - mean) * (gold[i] - mean);
  }
  if (ss_tot <= kTieTolerance) throw ValidationError("undefined R\xC2\xB2: constant gold");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace cot2el
