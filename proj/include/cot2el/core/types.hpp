#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cot2el/core/error.hpp"

namespace cot2el {

enum class TaskKind { NLI, MCQA };

/// Dataset schema: NLI with per-source label distributions, or one of the two
/// Likert-rated multiple-choice layouts (3 options SIQA-like, 5 options CQA-like).
enum class SchemaKind { NLI, SIQA, CQA };

inline const char* to_string(TaskKind k) { return k == TaskKind::NLI ? "NLI" : "MCQA"; }

inline const char* to_string(SchemaKind k) {
  switch (k) {
    case SchemaKind::NLI: return "nli";
    case SchemaKind::SIQA: return "siqa";
    case SchemaKind::CQA: return "cqa";
  }
  return "?";
}

inline SchemaKind schema_kind_from_string(const std::string& s) {
  if (s == "nli") return SchemaKind::NLI;
  if (s == "siqa") return SchemaKind::SIQA;
  if (s == "cqa") return SchemaKind::CQA;
  throw ValidationError("unknown schema kind '" + s + "' (expected nli, siqa or cqa)");
}

struct OptionDef {
  char letter = 'A';
  std::string text;
};

struct DistributionSource {
  std::string name;
  std::vector<double> probs;
};

struct GoldAnnotation {
  enum class Kind { DistributionSources, LikertScores };
  Kind kind = Kind::DistributionSources;
  std::vector<DistributionSource> distribution_sources;
  std::vector<std::vector<int>> likert;  // one rating list per option
};

struct Instance {
  std::string id;
  TaskKind task_kind = TaskKind::NLI;
  std::optional<std::string> context;  // premise or social scenario
  std::string question;                // hypothesis for NLI
  std::vector<OptionDef> options;
  GoldAnnotation gold;

  std::size_t size() const noexcept { return options.size(); }

  std::optional<std::size_t> index_of(char letter) const {
    for (std::size_t i = 0; i < options.size(); ++i)
      if (options[i].letter == letter) return i;
    return std::nullopt;
  }
};

inline constexpr double kInternalTolerance = 1e-9;
inline constexpr double kIngestTolerance = 1e-6;

/// Probability vector indexed by option order.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> values, double tol = kInternalTolerance)
      : values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("distribution is empty");
    double sum = 0.0;
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("distribution has a negative or non-finite entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) throw ValidationError("distribution not normalized");
  }

  /// Divides by the sum; the input must be non-negative with positive mass.
  static Distribution normalize(std::vector<double> values) {
    double sum = 0.0;
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("distribution has a negative or non-finite entry");
      sum += v;
    }
    if (!(sum > 0.0)) throw ValidationError("distribution has zero mass");
    for (double& v : values) v /= sum;
    return Distribution(std::move(values));
  }

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Plausibility scores on the 1..5 Likert range.
class ScoreVector {
 public:
  ScoreVector() = default;
  explicit ScoreVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("score vector is empty");
    for (double v : values_)
      if (!(v >= 1.0 && v <= 5.0)) throw ValidationError("score outside [1,5]");
  }

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Rank positions (1 = best). Ties carry the mean of the positions they span.
class Ranking {
 public:
  Ranking() = default;
  explicit Ranking(std::vector<double> ranks) : ranks_(std::move(ranks)) {
    const auto n = static_cast<double>(ranks_.size());
    if (ranks_.empty()) throw ValidationError("ranking is empty");
    double sum = 0.0;
    for (double r : ranks_) {
      if (!(r >= 1.0 - kInternalTolerance && r <= n + kInternalTolerance))
        throw ValidationError("rank outside [1,n]");
      sum += r;
    }
    if (std::abs(sum - n * (n + 1) / 2) > kInternalTolerance) throw ValidationError("rank sum is not n(n+1)/2");
  }

  const std::vector<double>& ranks() const noexcept { return ranks_; }
  std::size_t size() const noexcept { return ranks_.size(); }
  double operator[](std::size_t i) const { return ranks_[i]; }

 private:
  std::vector<double> ranks_;
};

}  // namespace cot2el
