#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/extract/el_set.hpp"
#include "cot2el/validate/measures.hpp"

namespace cot2el {

using json = nlohmann::json;

struct SimilarityBreakdown {
  std::array<double, 3> lexical{};    // n = 1, 2, 3
  std::array<double, 3> syntactic{};  // n = 1, 2, 3
  double semantic_cos = 0.0;
  double semantic_euc = 0.0;
  double lev_ratio = 0.0;
  double avg4 = 0.0;

  double lexical_mean() const { return (lexical[0] + lexical[1] + lexical[2]) / 3.0; }
  double syntactic_mean() const { return (syntactic[0] + syntactic[1] + syntactic[2]) / 3.0; }
};

/// Relative weights of the components in the "weight-avg" column.
struct ValidationWeights {
  double lexical = 1.0;
  double syntactic = 1.0;
  double semantic_cos = 1.0;
  double semantic_euc = 1.0;
  double lev_ratio = 1.0;

  double sum() const { return lexical + syntactic + semantic_cos + semantic_euc + lev_ratio; }
};

struct ScoringContext {
  Tagger& tagger;
  Embedder& embedder;
  ValidationWeights weights{};
};

inline SimilarityBreakdown similarity_breakdown(std::string_view a, std::string_view b, ScoringContext& ctx) {
  SimilarityBreakdown s;
  for (int n = 1; n <= 3; ++n) {
    s.lexical[static_cast<std::size_t>(n - 1)] = lexical_similarity(a, b, n);
    s.syntactic[static_cast<std::size_t>(n - 1)] = syntactic_similarity(a, b, n, ctx.tagger);
  }
  const auto sem = semantic_similarity(a, b, ctx.embedder);
  s.semantic_cos = sem.cos;
  s.semantic_euc = sem.euc;
  s.lev_ratio = levenshtein_ratio(a, b);
  s.avg4 = (s.lexical_mean() + s.syntactic_mean() + s.semantic_cos + s.lev_ratio) / 4.0;
  return s;
}

/// Report columns; avg4 is the headline score.
enum MetricColumn : std::size_t { kLex1, kLex2, kLex3, kSyn1, kSyn2, kSyn3, kCos, kEuc, kLev, kAvg4, kWeightAvg, kColumnCount };

inline constexpr std::array<const char*, kColumnCount> kColumnNames = {
    "lexical_1", "lexical_2", "lexical_3", "syntactic_1", "syntactic_2", "syntactic_3",
    "semantic_cos", "semantic_euc", "lev_ratio", "avg4", "weight_avg"};

using MetricRow = std::array<double, kColumnCount>;

inline MetricRow to_row(const SimilarityBreakdown& s, const ValidationWeights& w) {
  const double total = w.sum();
  if (!(total > 0.0)) throw ValidationError("validation weights must have a positive sum");
  const double weighted = (w.lexical * s.lexical_mean() + w.syntactic * s.syntactic_mean() +
                           w.semantic_cos * s.semantic_cos + w.semantic_euc * s.semantic_euc +
                           w.lev_ratio * s.lev_ratio) /
                          total;
  return {s.lexical[0], s.lexical[1], s.lexical[2], s.syntactic[0], s.syntactic[1], s.syntactic[2],
          s.semantic_cos, s.semantic_euc, s.lev_ratio, s.avg4, weighted};
}

inline MetricRow filled_row(double v) {
  MetricRow r;
  r.fill(v);
  return r;
}

/// Every column follows the same rule as the avg4 score: 1 when both lists are
/// empty, 0 when exactly one is, otherwise the mean over machine explanations
/// of the best value against any human explanation.
inline MetricRow stance_pair_row(const std::vector<std::string>& machine, const std::vector<std::string>& human,
                                 ScoringContext& ctx) {
  if (machine.empty() && human.empty()) return filled_row(1.0);
  if (machine.empty() || human.empty()) return filled_row(0.0);
  MetricRow total = filled_row(0.0);
  for (const auto& e : machine) {
    MetricRow best = filled_row(0.0);
    for (const auto& h : human) {
      const MetricRow r = to_row(similarity_breakdown(e, h, ctx), ctx.weights);
      for (std::size_t c = 0; c < kColumnCount; ++c) best[c] = std::max(best[c], r[c]);
    }
    for (std::size_t c = 0; c < kColumnCount; ++c) total[c] += best[c];
  }
  for (double& v : total) v /= static_cast<double>(machine.size());
  return total;
}

inline double stance_pair_score(const std::vector<std::string>& machine, const std::vector<std::string>& human,
                                ScoringContext& ctx) {
  return stance_pair_row(machine, human, ctx)[kAvg4];
}

struct CellScore {
  char letter;
  Stance stance;
  MetricRow row;
};

struct InstanceValidation {
  std::string instance_id;
  std::vector<CellScore> cells;  // 2k entries
  MetricRow mean{};

  double score() const { return mean[kAvg4]; }
};

inline InstanceValidation instance_score(const ELSet& machine, const ELSet& human, ScoringContext& ctx) {
  if (machine.options.size() != human.options.size())
    throw ValidationError("option sets differ between machine and human EL for " + machine.instance_id);
  for (std::size_t i = 0; i < machine.options.size(); ++i)
    if (machine.options[i].letter != human.options[i].letter)
      throw ValidationError("option sets differ between machine and human EL for " + machine.instance_id);
  InstanceValidation out;
  out.instance_id = machine.instance_id;
  out.mean = filled_row(0.0);
  for (std::size_t i = 0; i < machine.options.size(); ++i) {
    for (auto stance : {Stance::Support, Stance::Oppose}) {
      const MetricRow r = stance_pair_row(machine.options[i].list(stance), human.options[i].list(stance), ctx);
      out.cells.push_back({machine.options[i].letter, stance, r});
      for (std::size_t c = 0; c < kColumnCount; ++c) out.mean[c] += r[c];
    }
  }
  if (!out.cells.empty())
    for (double& v : out.mean) v /= static_cast<double>(out.cells.size());
  return out;
}

struct ValidationReport {
  std::vector<InstanceValidation> instances;
  MetricRow corpus{};

  double score() const { return corpus[kAvg4]; }
};

/// Scores each (machine, human) pair and averages instance scores per column.
inline ValidationReport validate_corpus(const std::vector<std::pair<ELSet, ELSet>>& pairs, ScoringContext& ctx) {
  ValidationReport rep;
  rep.corpus = filled_row(0.0);
  for (const auto& [machine, human] : pairs) {
    rep.instances.push_back(instance_score(machine, human, ctx));
    for (std::size_t c = 0; c < kColumnCount; ++c) rep.corpus[c] += rep.instances.back().mean[c];
  }
  if (!rep.instances.empty())
    for (double& v : rep.corpus) v /= static_cast<double>(rep.instances.size());
  return rep;
}

inline json metric_row_to_json(const MetricRow& r) {
  json j = json::object();
  for (std::size_t c = 0; c < kColumnCount; ++c) j[kColumnNames[c]] = r[c];
  return j;
}

inline json validation_report_to_json(const ValidationReport& rep) {
  json instances = json::array();
  for (const auto& inst : rep.instances) {
    json cells = json::array();
    for (const auto& c : inst.cells)
      cells.push_back({{"option", std::string(1, c.letter)}, {"stance", to_string(c.stance)}, {"scores", metric_row_to_json(c.row)}});
    instances.push_back({{"instance_id", inst.instance_id}, {"instance_score", inst.score()}, {"mean", metric_row_to_json(inst.mean)}, {"cells", cells}});
  }
  return {{"corpus", metric_row_to_json(rep.corpus)}, {"instances", instances}};
}

}  // namespace cot2el
