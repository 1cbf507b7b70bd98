#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/core/types.hpp"
#include "cot2el/util/text.hpp"

namespace cot2el {

using json = nlohmann::json;

namespace detail {

inline std::size_t expected_option_count(SchemaKind k) { return k == SchemaKind::CQA ? 5 : 3; }

inline void validate_instance(const Instance& inst, SchemaKind schema) {
  if (inst.id.empty()) throw ValidationError("id is empty");
  if (inst.options.empty()) throw ValidationError("options empty");
  const bool nli = schema == SchemaKind::NLI;
  if ((inst.task_kind == TaskKind::NLI) != nli)
    throw ValidationError(std::string("task_kind ") + to_string(inst.task_kind) + " does not match schema " + to_string(schema));
  if (inst.options.size() != expected_option_count(schema))
    throw ValidationError("expected " + std::to_string(expected_option_count(schema)) + " options, got " +
                          std::to_string(inst.options.size()));
  for (std::size_t i = 0; i < inst.options.size(); ++i) {
    const auto& opt = inst.options[i];
    if (opt.letter != static_cast<char>('A' + i)) throw ValidationError("option letters must be consecutive from A");
    if (text::trim_view(opt.text).empty()) throw ValidationError("option " + std::string(1, opt.letter) + " has empty text");
  }
  if (nli) {
    static const char* kLabels[] = {"Entailment", "Neutral", "Contradiction"};
    for (std::size_t i = 0; i < 3; ++i)
      if (!text::iequals(text::trim_view(inst.options[i].text), kLabels[i]))
        throw ValidationError("NLI options must be A. Entailment, B. Neutral, C. Contradiction");
    if (!inst.context) throw ValidationError("NLI record needs a premise in context");
  }
  if (schema == SchemaKind::SIQA && !inst.context) throw ValidationError("SIQA record needs a scenario in context");
  if (text::trim_view(inst.question).empty()) throw ValidationError("question is empty");

  const auto& g = inst.gold;
  if (g.kind == GoldAnnotation::Kind::DistributionSources) {
    if (!nli) throw ValidationError("distribution gold on a Likert schema");
    if (g.distribution_sources.empty()) throw ValidationError("no distribution sources");
    for (const auto& src : g.distribution_sources) {
      if (src.probs.size() != inst.options.size())
        throw ValidationError("distribution " + src.name + " length differs from option count");
      double sum = 0.0;
      for (double p : src.probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("distribution " + src.name + " has a negative entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kIngestTolerance) throw ValidationError("distribution not normalized (" + src.name + ")");
    }
  } else {
    if (nli) throw ValidationError("Likert gold on the NLI schema");
    if (g.likert.size() != inst.options.size()) throw ValidationError("likert list count differs from option count");
    for (const auto& ratings : g.likert) {
      if (ratings.empty()) throw ValidationError("empty likert rating list");
      for (int r : ratings)
        if (r < 1 || r > 5) throw ValidationError("likert rating " + std::to_string(r) + " outside 1..5");
    }
  }
}

}  // namespace detail

inline Instance instance_from_json(const json& j) {
  Instance inst;
  inst.id = j.at("id").get<std::string>();
  const auto kind = j.at("task_kind").get<std::string>();
  if (kind == "NLI") inst.task_kind = TaskKind::NLI;
  else if (kind == "MCQA") inst.task_kind = TaskKind::MCQA;
  else throw ValidationError("task_kind must be NLI or MCQA");
  if (j.contains("context") && !j.at("context").is_null()) inst.context = j.at("context").get<std::string>();
  inst.question = j.at("question").get<std::string>();
  for (const auto& o : j.at("options")) {
    const auto letter = o.at("letter").get<std::string>();
    if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'E') throw ValidationError("option letter must be one of A..E");
    inst.options.push_back({letter[0], o.at("text").get<std::string>()});
  }
  const auto& gold = j.at("gold");
  if (gold.contains("distribution_sources")) {
    inst.gold.kind = GoldAnnotation::Kind::DistributionSources;
    for (const auto& s : gold.at("distribution_sources"))
      inst.gold.distribution_sources.push_back({s.at("name").get<std::string>(), s.at("probs").get<std::vector<double>>()});
  } else if (gold.contains("likert")) {
    inst.gold.kind = GoldAnnotation::Kind::LikertScores;
    inst.gold.likert = gold.at("likert").get<std::vector<std::vector<int>>>();
  } else {
    throw ValidationError("gold needs distribution_sources or likert");
  }
  return inst;
}

inline json instance_to_json(const Instance& inst) {
  json opts = json::array();
  for (const auto& o : inst.options) opts.push_back({{"letter", std::string(1, o.letter)}, {"text", o.text}});
  json gold;
  if (inst.gold.kind == GoldAnnotation::Kind::DistributionSources) {
    json srcs = json::array();
    for (const auto& s : inst.gold.distribution_sources) srcs.push_back({{"name", s.name}, {"probs", s.probs}});
    gold["distribution_sources"] = srcs;
  } else {
    gold["likert"] = inst.gold.likert;
  }
  return {{"id", inst.id},
          {"task_kind", to_string(inst.task_kind)},
          {"context", inst.context ? json(*inst.context) : json(nullptr)},
          {"question", inst.question},
          {"options", opts},
          {"gold", gold}};
}

/// Parses newline-delimited records from a stream. `origin` names the source in errors.
inline std::vector<Instance> parse_dataset(std::istream& in, SchemaKind schema, const std::string& origin = "<stream>") {
  std::vector<Instance> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim_view(line).empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    Instance inst;
    try {
      inst = instance_from_json(json::parse(line));
      detail::validate_instance(inst, schema);
    } catch (const json::exception& e) {
      throw ValidationError(where + "malformed record: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    if (!seen.insert(inst.id).second) throw ValidationError(where + "duplicate id " + inst.id);
    out.push_back(std::move(inst));
  }
  return out;
}

inline std::vector<Instance> load_dataset(const std::filesystem::path& path, SchemaKind schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return parse_dataset(in, schema, path.string());
}

}  // namespace cot2el
