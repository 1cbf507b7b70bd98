#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/core/gold.hpp"
#include "cot2el/core/types.hpp"
#include "cot2el/extract/el_set.hpp"
#include "cot2el/gateway/gateway.hpp"
#include "cot2el/gateway/templates.hpp"
#include "cot2el/util/text.hpp"

namespace cot2el {

using json = nlohmann::json;

enum class JudgeMethod { RankRank, RankLogits, RankScore };

inline const char* to_string(JudgeMethod m) {
  switch (m) {
    case JudgeMethod::RankRank: return "rank";
    case JudgeMethod::RankLogits: return "logits";
    case JudgeMethod::RankScore: return "score";
  }
  return "?";
}

inline JudgeMethod judge_method_from_string(std::string_view s) {
  if (s == "rank") return JudgeMethod::RankRank;
  if (s == "logits") return JudgeMethod::RankLogits;
  if (s == "score") return JudgeMethod::RankScore;
  throw ValidationError("unknown ranking method '" + std::string(s) + "' (expected rank, logits or score)");
}

inline constexpr int kJudgeRuns = 3;

struct JudgeConfig {
  std::string model;
  double temperature = 0.7;
  int max_tokens = 64;
};

/// What goes into the Explanations slot: nothing (baseline), an ELSet, or free
/// text such as the unstructured parser listing.
struct Injection {
  const ELSet* el = nullptr;
  const std::string* text = nullptr;

  bool active() const { return el || text; }
};

// ---- parsing ----------------------------------------------------------------

namespace detail {

inline std::string_view first_nonempty_line(std::string_view s) {
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    auto line = text::trim_view(s.substr(start, nl - start));
    if (!line.empty()) return line;
    start = nl + 1;
  }
  return {};
}

}  // namespace detail

/// Ranks from a "B A C" style reply (first non-empty line). Standalone option
/// letters count in order of appearance, repeats are ignored, and options never
/// mentioned share the mean of the remaining positions. nullopt if no letter.
inline std::optional<Ranking> parse_direct_rank(std::string_view reply, std::size_t n_options) {
  const auto line = detail::first_nonempty_line(reply);
  std::vector<int> order;
  std::vector<bool> seen(n_options, false);
  for (std::size_t i = 0; i < line.size(); ++i) {
    const auto c = static_cast<unsigned char>(line[i]);
    if (c < 'A' || c >= 'A' + n_options) continue;
    const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(line[i - 1]));
    const bool right_ok = i + 1 == line.size() || !std::isalnum(static_cast<unsigned char>(line[i + 1]));
    if (!left_ok || !right_ok) continue;
    const std::size_t k = c - 'A';
    if (seen[k]) continue;
    seen[k] = true;
    order.push_back(static_cast<int>(k));
  }
  if (order.empty()) return std::nullopt;
  std::vector<double> ranks(n_options, 0.0);
  for (std::size_t p = 0; p < order.size(); ++p) ranks[static_cast<std::size_t>(order[p])] = static_cast<double>(p + 1);
  const double tail = (static_cast<double>(order.size() + 1) + static_cast<double>(n_options)) / 2.0;
  for (std::size_t k = 0; k < n_options; ++k)
    if (!seen[k]) ranks[k] = tail;
  return Ranking(std::move(ranks));
}

/// First integer in 1..5 appearing in the reply.
inline std::optional<int> parse_score_reply(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size()) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) ++j;
    if (j - i == 1 && reply[i] >= '1' && reply[i] <= '5') return reply[i] - '0';
    i = j;
  }
  return std::nullopt;
}

/// Softmax over the option letters' first-token logits. Each letter takes the
/// larger of its "X" and " X" entries; letters absent from the map get zero mass.
inline std::optional<Distribution> logits_to_distribution(const std::map<std::string, double>& logits,
                                                          std::size_t n_options) {
  const double none = -std::numeric_limits<double>::infinity();
  std::vector<double> best(n_options, none);
  for (std::size_t k = 0; k < n_options; ++k) {
    const std::string letter(1, static_cast<char>('A' + k));
    for (const auto& tok : {letter, " " + letter}) {
      if (auto it = logits.find(tok); it != logits.end() && std::isfinite(it->second))
        best[k] = std::max(best[k], it->second);
    }
  }
  const double mx = *std::max_element(best.begin(), best.end());
  if (mx == none) return std::nullopt;
  std::vector<double> p(n_options, 0.0);
  for (std::size_t k = 0; k < n_options; ++k) p[k] = best[k] == none ? 0.0 : std::exp(best[k] - mx);
  return Distribution::normalize(std::move(p));
}

// ---- aggregation ------------------------------------------------------------

/// Element-wise mean of the run rankings, re-ranked with average ties.
inline Ranking aggregate_rankings(const std::vector<Ranking>& runs) {
  if (runs.empty()) throw ValidationError("no valid runs to aggregate");
  std::vector<double> mean(runs.front().size(), 0.0);
  for (const auto& r : runs)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r[i];
  for (double& v : mean) v /= static_cast<double>(runs.size());
  return rank_ascending(mean);
}

inline Distribution aggregate_distributions(const std::vector<Distribution>& runs) {
  if (runs.empty()) throw ValidationError("no valid runs to aggregate");
  std::vector<double> mean(runs.front().size(), 0.0);
  for (const auto& d : runs)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += d[i];
  for (double& v : mean) v /= static_cast<double>(runs.size());
  return Distribution::normalize(std::move(mean));
}

/// Per-option mean over the valid runs; `per_run[r][k]` is nullopt when invalid.
inline ScoreVector aggregate_scores(const std::vector<std::vector<std::optional<int>>>& per_run, std::size_t n_options,
                                    const std::string& instance_id = "") {
  std::vector<double> mean(n_options, 0.0);
  for (std::size_t k = 0; k < n_options; ++k) {
    int count = 0;
    for (const auto& run : per_run) {
      if (k < run.size() && run[k]) {
        mean[k] += *run[k];
        ++count;
      }
    }
    if (count == 0)
      throw ValidationError("instance " + instance_id + ": option " + std::string(1, static_cast<char>('A' + k)) +
                            " has no valid score in any run");
    mean[k] /= count;
  }
  return ScoreVector(std::move(mean));
}

// ---- prompts ----------------------------------------------------------------

/// EL-injected prompt for `kind`. An all-empty set still renders the
/// Explanations line (empty) and records a warning.
inline std::string inject_el(PromptKind kind, const Instance& inst, const ELSet& el,
                             std::vector<std::string>* warnings = nullptr, const OptionDef* target = nullptr) {
  if (el.empty() && warnings) warnings->push_back("instance " + inst.id + ": empty EL set injected");
  return render_prompt(template_for(kind, schema_of(inst), true), inst, &el, target);
}

inline std::string judge_prompt(PromptKind kind, const Instance& inst, const Injection& inj,
                                std::vector<std::string>* warnings, const OptionDef* target = nullptr) {
  if (inj.el) return inject_el(kind, inst, *inj.el, warnings, target);
  const TemplateId id = template_for(kind, schema_of(inst), inj.text != nullptr);
  if (inj.text) return render_prompt_with_text(id, inst, *inj.text, target);
  return render_prompt(id, inst, nullptr, target);
}

// ---- judge outputs ----------------------------------------------------------

struct JudgeRun {
  int run_index = 0;
  std::vector<std::string> replies;  // one per call (score: one per option)
  bool valid = false;
  json parsed;  // ranks, distribution, or per-option scores (null entries invalid)
};

struct JudgeOutputs {
  std::string instance_id;
  JudgeMethod method = JudgeMethod::RankRank;
  std::vector<JudgeRun> runs;
  Ranking ranking;
  std::optional<Distribution> distribution;
  std::optional<ScoreVector> scores;
  std::vector<std::string> warnings;
};

inline json judge_outputs_to_json(const JudgeOutputs& o) {
  json per_run = json::array();
  for (const auto& r : o.runs)
    per_run.push_back({{"run_index", r.run_index}, {"valid", r.valid}, {"replies", r.replies}, {"parsed", r.parsed}});
  json agg = {{"ranking", o.ranking.ranks()}};
  agg["distribution"] = o.distribution ? json(o.distribution->values()) : json(nullptr);
  agg["scores"] = o.scores ? json(o.scores->values()) : json(nullptr);
  return {{"instance_id", o.instance_id},
          {"method", to_string(o.method)},
          {"per_run", per_run},
          {"aggregated", agg},
          {"warnings", o.warnings}};
}

inline JudgeOutputs judge_outputs_from_json(const json& j) {
  JudgeOutputs o;
  o.instance_id = j.at("instance_id").get<std::string>();
  o.method = judge_method_from_string(j.at("method").get<std::string>());
  for (const auto& r : j.at("per_run"))
    o.runs.push_back({r.at("run_index").get<int>(), r.at("replies").get<std::vector<std::string>>(),
                      r.at("valid").get<bool>(), r.at("parsed")});
  const auto& agg = j.at("aggregated");
  o.ranking = Ranking(agg.at("ranking").get<std::vector<double>>());
  if (!agg.at("distribution").is_null()) o.distribution = Distribution(agg.at("distribution").get<std::vector<double>>());
  if (!agg.at("scores").is_null()) o.scores = ScoreVector(agg.at("scores").get<std::vector<double>>());
  if (j.contains("warnings")) o.warnings = j.at("warnings").get<std::vector<std::string>>();
  return o;
}

// ---- judges -----------------------------------------------------------------

namespace detail {

inline CompletionRequest judge_request(const JudgeConfig& cfg, std::string prompt, int run, bool logits) {
  CompletionRequest req;
  req.model = cfg.model;
  req.prompt = std::move(prompt);
  req.temperature = cfg.temperature;
  req.max_tokens = cfg.max_tokens;
  req.want_first_token_logits = logits;
  req.run_index = run;
  return req;
}

}  // namespace detail

inline JudgeOutputs judge_direct_rank(Gateway& gw, const Instance& inst, const Injection& inj, const JudgeConfig& cfg) {
  JudgeOutputs out;
  out.instance_id = inst.id;
  out.method = JudgeMethod::RankRank;
  const std::string prompt = judge_prompt(PromptKind::DirectRank, inst, inj, &out.warnings);
  std::vector<Ranking> valid;
  for (int run = 0; run < kJudgeRuns; ++run) {
    const Completion c = gw.complete(detail::judge_request(cfg, prompt, run, false));
    JudgeRun jr{run, {c.text}, false, nullptr};
    if (auto r = parse_direct_rank(c.text, inst.size())) {
      jr.valid = true;
      jr.parsed = r->ranks();
      valid.push_back(*r);
    } else {
      out.warnings.push_back("run " + std::to_string(run) + ": no option letters in reply");
    }
    out.runs.push_back(std::move(jr));
  }
  if (valid.empty()) throw ValidationError("instance " + inst.id + ": all direct-rank runs invalid");
  out.ranking = aggregate_rankings(valid);
  return out;
}

inline JudgeOutputs judge_logits(Gateway& gw, const Instance& inst, const Injection& inj, const JudgeConfig& cfg) {
  JudgeOutputs out;
  out.instance_id = inst.id;
  out.method = JudgeMethod::RankLogits;
  const std::string prompt = judge_prompt(PromptKind::Logits, inst, inj, &out.warnings);
  std::vector<Distribution> valid;
  for (int run = 0; run < kJudgeRuns; ++run) {
    const Completion c = gw.complete(detail::judge_request(cfg, prompt, run, true));
    JudgeRun jr{run, {c.text}, false, nullptr};
    std::optional<Distribution> d;
    if (c.first_token_logits) d = logits_to_distribution(*c.first_token_logits, inst.size());
    if (d) {
      jr.valid = true;
      jr.parsed = d->values();
      valid.push_back(*d);
    } else {
      out.warnings.push_back("run " + std::to_string(run) + ": no option-letter token among first-token logits");
    }
    out.runs.push_back(std::move(jr));
  }
  if (valid.empty()) throw ValidationError("instance " + inst.id + ": all logits runs invalid");
  out.distribution = aggregate_distributions(valid);
  out.ranking = ranking_from_distribution(*out.distribution);
  return out;
}

inline JudgeOutputs judge_score(Gateway& gw, const Instance& inst, const Injection& inj, const JudgeConfig& cfg) {
  JudgeOutputs out;
  out.instance_id = inst.id;
  out.method = JudgeMethod::RankScore;
  std::vector<std::vector<std::optional<int>>> per_run;
  for (int run = 0; run < kJudgeRuns; ++run) {
    JudgeRun jr{run, {}, true, json::array()};
    std::vector<std::optional<int>> scores;
    for (const auto& opt : inst.options) {
      const std::string prompt = judge_prompt(PromptKind::Score, inst, inj, run == 0 ? &out.warnings : nullptr, &opt);
      const Completion c = gw.complete(detail::judge_request(cfg, prompt, run, false));
      jr.replies.push_back(c.text);
      const auto s = parse_score_reply(c.text);
      if (!s) {
        jr.valid = false;
        out.warnings.push_back("run " + std::to_string(run) + ", option " + opt.letter + ": no score in 1..5");
      }
      jr.parsed.push_back(s ? json(*s) : json(nullptr));
      scores.push_back(s);
    }
    per_run.push_back(std::move(scores));
    out.runs.push_back(std::move(jr));
  }
  out.scores = aggregate_scores(per_run, inst.size(), inst.id);
  out.ranking = ranking_from_scores(*out.scores);
  return out;
}

inline JudgeOutputs run_judge(JudgeMethod m, Gateway& gw, const Instance& inst, const Injection& inj,
                              const JudgeConfig& cfg) {
  switch (m) {
    case JudgeMethod::RankRank: return judge_direct_rank(gw, inst, inj, cfg);
    case JudgeMethod::RankLogits: return judge_logits(gw, inst, inj, cfg);
    case JudgeMethod::RankScore: return judge_score(gw, inst, inj, cfg);
  }
  throw Error("unknown judge method");
}

}  // namespace cot2el
