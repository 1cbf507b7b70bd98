#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/core/types.hpp"
#include "cot2el/judge/judge.hpp"
#include "cot2el/metrics/metrics.hpp"
#include "cot2el/validate/score.hpp"

namespace cot2el {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class Stage { Ingest, CoT, Parse, Structure, Segment, Refine, GenEX, Judge, Evaluate, Validate, Report };

inline constexpr std::array<Stage, 11> kAllStages = {Stage::Ingest, Stage::CoT,    Stage::Parse,    Stage::Structure,
                                                     Stage::Segment, Stage::Refine, Stage::GenEX,    Stage::Judge,
                                                     Stage::Evaluate, Stage::Validate, Stage::Report};

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::CoT: return "cot";
    case Stage::Parse: return "parse";
    case Stage::Structure: return "structure";
    case Stage::Segment: return "segment";
    case Stage::Refine: return "refine";
    case Stage::GenEX: return "genex";
    case Stage::Judge: return "judge";
    case Stage::Evaluate: return "evaluate";
    case Stage::Validate: return "validate";
    case Stage::Report: return "report";
  }
  return "?";
}

inline Stage stage_from_string(const std::string& s) {
  for (auto st : kAllStages)
    if (s == to_string(st)) return st;
  throw ValidationError("unknown stage " + s);
}

/// Judge-input variants. The first four reuse the filtered set, EL-* the raw set.
enum class Variant { Raw, Filtered, FilteredSup, FilteredOpp, ELSup, ELOpp, GenEX, CoTParser, HumanEX, Baseline };

inline constexpr std::array<Variant, 10> kAllVariants = {
    Variant::Raw,   Variant::Filtered, Variant::FilteredSup, Variant::FilteredOpp, Variant::ELSup,
    Variant::ELOpp, Variant::GenEX,    Variant::CoTParser,   Variant::HumanEX,     Variant::Baseline};

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::Raw: return "Raw";
    case Variant::Filtered: return "Filtered";
    case Variant::FilteredSup: return "Filtered-sup";
    case Variant::FilteredOpp: return "Filtered-opp";
    case Variant::ELSup: return "EL-sup";
    case Variant::ELOpp: return "EL-opp";
    case Variant::GenEX: return "GenEX";
    case Variant::CoTParser: return "CoT_parser";
    case Variant::HumanEX: return "HumanEX";
    case Variant::Baseline: return "baseline";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  for (auto v : kAllVariants)
    if (s == to_string(v)) return v;
  throw ValidationError("unknown EL variant " + s);
}

/// Stage whose per-instance artifact a variant is built from; nullopt for inputs
/// outside the artifact tree (baseline, human annotations).
inline std::optional<Stage> variant_source(Variant v) {
  switch (v) {
    case Variant::Raw:
    case Variant::ELSup:
    case Variant::ELOpp: return Stage::Structure;
    case Variant::Filtered:
    case Variant::FilteredSup:
    case Variant::FilteredOpp: return Stage::Refine;
    case Variant::GenEX: return Stage::GenEX;
    case Variant::CoTParser: return Stage::Parse;
    case Variant::HumanEX:
    case Variant::Baseline: return std::nullopt;
  }
  return std::nullopt;
}

struct EndpointConfig {
  std::string name;   // judge label used in paths and reports
  std::string model;  // model id sent to the provider
  std::string base_url;
  std::string api_key_env = "OPENAI_API_KEY";
};

struct RunConfig {
  fs::path dataset_path;
  SchemaKind schema = SchemaKind::NLI;
  std::string dataset_name;

  EndpointConfig reasoning{"reasoning", "reasoning", "", "OPENAI_API_KEY"};
  EndpointConfig base{"base", "base", "", "OPENAI_API_KEY"};
  std::vector<EndpointConfig> judges{{"judge", "judge", "", "OPENAI_API_KEY"}};
  std::string genex_role = "base";  // "base" or "reasoning"

  std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};
  std::vector<JudgeMethod> methods{JudgeMethod::RankRank, JudgeMethod::RankLogits, JudgeMethod::RankScore};
  std::vector<Stage> stages{kAllStages.begin(), kAllStages.end()};

  fs::path cache_dir = "cache";
  fs::path artifacts_dir = "artifacts";
  std::optional<fs::path> mock_dir;
  std::optional<fs::path> human_el_dir;
  std::optional<fs::path> connectives;
  std::optional<std::string> segmenter;  // external EDU adapter target
  std::optional<std::string> tagger;
  std::optional<std::string> embedder;

  int workers = 4;
  std::uint64_t seed = 0;
  double min_ratio = 0.0;
  KendallVariant tau = KendallVariant::TauB;
  double max_failure_fraction = 0.5;

  int extraction_max_tokens = 8192;
  double judge_temperature = 0.7;
  int judge_max_tokens = 64;
  int retry_attempts = 3;
  int retry_backoff_ms = 1000;
  ValidationWeights weights{};

  fs::path dataset_root() const { return artifacts_dir / dataset_name; }
  bool stage_enabled(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline EndpointConfig endpoint_from_json(const json& j, const std::string& default_name) {
  EndpointConfig e;
  e.name = j.value("name", default_name);
  e.model = j.value("model", e.name);
  e.base_url = j.value("base_url", "");
  e.api_key_env = j.value("api_key_env", "OPENAI_API_KEY");
  if (e.name.empty() || e.model.empty()) throw ValidationError("model entries need a non-empty name and model");
  return e;
}

template <class T, class F>
std::vector<T> list_of(const json& j, const char* key, F parse) {
  std::vector<T> out;
  for (const auto& item : j.at(key)) out.push_back(parse(item.get<std::string>()));
  return out;
}

}  // namespace detail

/// Reads a JSON config. Relative paths resolve against the config file's directory.
/// API keys never appear here, only the names of the variables that hold them.
inline RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      c.dataset_path = detail::resolve(base_dir, d.at("path").get<std::string>());
      c.schema = schema_kind_from_string(d.at("schema").get<std::string>());
      c.dataset_name = d.value("name", c.dataset_path.stem().string());
    }
    if (j.contains("models")) {
      const auto& m = j.at("models");
      if (m.contains("reasoning")) c.reasoning = detail::endpoint_from_json(m.at("reasoning"), "reasoning");
      if (m.contains("base")) c.base = detail::endpoint_from_json(m.at("base"), "base");
      if (m.contains("judges")) {
        c.judges.clear();
        for (const auto& e : m.at("judges")) c.judges.push_back(detail::endpoint_from_json(e, "judge"));
      }
      c.genex_role = m.value("genex", c.genex_role);
    }
    if (j.contains("variants")) c.variants = detail::list_of<Variant>(j, "variants", variant_from_string);
    if (j.contains("methods")) c.methods = detail::list_of<JudgeMethod>(j, "methods", judge_method_from_string);
    if (j.contains("stages")) c.stages = detail::list_of<Stage>(j, "stages", stage_from_string);
    if (j.contains("cache_dir")) c.cache_dir = detail::resolve(base_dir, j.at("cache_dir").get<std::string>());
    if (j.contains("artifacts_dir")) c.artifacts_dir = detail::resolve(base_dir, j.at("artifacts_dir").get<std::string>());
    if (j.contains("human_el_dir")) c.human_el_dir = detail::resolve(base_dir, j.at("human_el_dir").get<std::string>());
    if (j.contains("connectives")) c.connectives = detail::resolve(base_dir, j.at("connectives").get<std::string>());
    if (j.contains("segmenter")) c.segmenter = j.at("segmenter").get<std::string>();
    if (j.contains("tagger")) c.tagger = j.at("tagger").get<std::string>();
    if (j.contains("embedder")) c.embedder = j.at("embedder").get<std::string>();
    c.workers = j.value("workers", c.workers);
    c.seed = j.value("seed", c.seed);
    c.min_ratio = j.value("min_ratio", c.min_ratio);
    if (j.contains("tau")) {
      const auto t = j.at("tau").get<std::string>();
      if (t != "a" && t != "b") throw ValidationError("tau must be \"a\" or \"b\"");
      c.tau = t == "a" ? KendallVariant::TauA : KendallVariant::TauB;
    }
    c.max_failure_fraction = j.value("max_failure_fraction", c.max_failure_fraction);
    if (j.contains("extraction")) c.extraction_max_tokens = j.at("extraction").value("max_tokens", c.extraction_max_tokens);
    if (j.contains("judge")) {
      c.judge_temperature = j.at("judge").value("temperature", c.judge_temperature);
      c.judge_max_tokens = j.at("judge").value("max_tokens", c.judge_max_tokens);
    }
    if (j.contains("retry")) {
      c.retry_attempts = j.at("retry").value("attempts", c.retry_attempts);
      c.retry_backoff_ms = j.at("retry").value("initial_backoff_ms", c.retry_backoff_ms);
    }
    if (j.contains("validation_weights")) {
      const auto& w = j.at("validation_weights");
      c.weights.lexical = w.value("lexical", 1.0);
      c.weights.syntactic = w.value("syntactic", 1.0);
      c.weights.semantic_cos = w.value("semantic_cos", 1.0);
      c.weights.semantic_euc = w.value("semantic_euc", 1.0);
      c.weights.lev_ratio = w.value("lev_ratio", 1.0);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("bad config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, fs::absolute(path).parent_path());
}

inline void validate_run_config(const RunConfig& c) {
  if (c.stages.empty()) throw ValidationError("no stage enabled");
  if (c.workers < 1) throw ValidationError("workers must be at least 1");
  if (c.judges.empty() && c.stage_enabled(Stage::Judge)) throw ValidationError("judge stage needs at least one judge model");
  if (c.min_ratio < 0.0 || c.min_ratio > 1.0) throw ValidationError("min_ratio must lie in [0,1]");
  if (c.max_failure_fraction < 0.0 || c.max_failure_fraction > 1.0)
    throw ValidationError("max_failure_fraction must lie in [0,1]");
  if (c.genex_role != "base" && c.genex_role != "reasoning") throw ValidationError("models.genex must be base or reasoning");
  if (c.dataset_name.empty()) throw ValidationError("config names no dataset");
  for (std::size_t i = 0; i < c.judges.size(); ++i)
    for (std::size_t k = i + 1; k < c.judges.size(); ++k)
      if (c.judges[i].name == c.judges[k].name) throw ValidationError("duplicate judge name " + c.judges[i].name);
}

}  // namespace cot2el
