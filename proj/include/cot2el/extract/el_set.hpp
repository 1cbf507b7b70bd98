#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/core/types.hpp"
#include "cot2el/util/text.hpp"

namespace cot2el {

using json = nlohmann::json;

enum class Stance { Support, Oppose };

inline const char* to_string(Stance s) { return s == Stance::Support ? "support" : "oppose"; }

enum class Provenance { Raw, Filtered, GenEX, Human };

/// Which stance lists an ELSet carries. Stance subsets keep the other lists empty.
enum class StanceScope { Both, SupportOnly, OpposeOnly };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Raw: return "Raw";
    case Provenance::Filtered: return "Filtered";
    case Provenance::GenEX: return "GenEX";
    case Provenance::Human: return "Human";
  }
  return "?";
}

/// One reasoning trace produced for an instance.
struct CoTRecord {
  std::string instance_id;
  std::string raw_cot;
  std::optional<char> final_answer;
  std::string model;
  int run_index = 0;
};

struct OptionExplanations {
  char letter = 'A';
  std::vector<std::string> support;
  std::vector<std::string> oppose;

  std::vector<std::string>& list(Stance s) { return s == Stance::Support ? support : oppose; }
  const std::vector<std::string>& list(Stance s) const { return s == Stance::Support ? support : oppose; }
};

/// Per-option support/oppose explanation lists for one instance.
struct ELSet {
  std::string instance_id;
  std::vector<OptionExplanations> options;  // instance option order
  Provenance provenance = Provenance::Raw;
  StanceScope scope = StanceScope::Both;

  /// "Filtered", "Filtered-sup", "GenEX", ...
  std::string provenance_tag() const {
    std::string tag = to_string(provenance);
    if (scope == StanceScope::SupportOnly) tag += "-sup";
    if (scope == StanceScope::OpposeOnly) tag += "-opp";
    return tag;
  }

  bool empty() const {
    for (const auto& o : options)
      if (!o.support.empty() || !o.oppose.empty()) return false;
    return true;
  }

  std::size_t explanation_count() const {
    std::size_t n = 0;
    for (const auto& o : options) n += o.support.size() + o.oppose.size();
    return n;
  }

  OptionExplanations* find(char letter) {
    for (auto& o : options)
      if (o.letter == letter) return &o;
    return nullptr;
  }
  const OptionExplanations* find(char letter) const {
    for (const auto& o : options)
      if (o.letter == letter) return &o;
    return nullptr;
  }

  /// Empty lists for every option of `inst`.
  static ELSet empty_for(const Instance& inst, Provenance p) {
    ELSet el;
    el.instance_id = inst.id;
    el.provenance = p;
    for (const auto& o : inst.options) el.options.push_back({o.letter, {}, {}});
    return el;
  }
};

/// Whitespace-collapses every entry, drops blanks and exact duplicates (first kept).
inline std::vector<std::string> dedup_explanations(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& raw : items) {
    auto s = text::collapse_whitespace(raw);
    if (s.empty()) continue;
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

/// Throws if the set breaks its invariants with respect to `inst`.
inline void validate_el_set(const ELSet& el, const Instance& inst) {
  if (el.instance_id != inst.id) throw ValidationError("ELSet instance id " + el.instance_id + " != " + inst.id);
  if (el.options.size() != inst.options.size()) throw ValidationError("ELSet option count differs from instance");
  for (std::size_t i = 0; i < inst.options.size(); ++i) {
    if (el.options[i].letter != inst.options[i].letter) throw ValidationError("ELSet option letters differ from instance");
    for (auto stance : {Stance::Support, Stance::Oppose}) {
      std::set<std::string> seen;
      for (const auto& e : el.options[i].list(stance)) {
        if (text::trim_view(e).empty()) throw ValidationError("ELSet contains an empty explanation");
        if (!seen.insert(e).second) throw ValidationError("ELSet contains a duplicate explanation: " + e);
      }
    }
  }
}

inline json el_set_to_json(const ELSet& el) {
  json opts = json::object();
  for (const auto& o : el.options) opts[std::string(1, o.letter)] = {{"support", o.support}, {"oppose", o.oppose}};
  return {{"instance_id", el.instance_id}, {"provenance", el.provenance_tag()}, {"options", opts}};
}

inline ELSet el_set_from_json(const json& j) {
  ELSet el;
  el.instance_id = j.at("instance_id").get<std::string>();
  std::string tag = j.value("provenance", "Raw");
  if (tag.ends_with("-sup")) {
    el.scope = StanceScope::SupportOnly;
    tag.resize(tag.size() - 4);
  } else if (tag.ends_with("-opp")) {
    el.scope = StanceScope::OpposeOnly;
    tag.resize(tag.size() - 4);
  }
  if (tag == "Raw") el.provenance = Provenance::Raw;
  else if (tag == "Filtered") el.provenance = Provenance::Filtered;
  else if (tag == "GenEX") el.provenance = Provenance::GenEX;
  else if (tag == "Human") el.provenance = Provenance::Human;
  else throw ValidationError("unknown ELSet provenance " + tag);
  for (const auto& [key, val] : j.at("options").items()) {
    if (key.size() != 1) throw ValidationError("ELSet option key must be a single letter: " + key);
    OptionExplanations o;
    o.letter = key[0];
    if (val.contains("support")) o.support = val.at("support").get<std::vector<std::string>>();
    if (val.contains("oppose")) o.oppose = val.at("oppose").get<std::vector<std::string>>();
    el.options.push_back(std::move(o));
  }
  return el;
}

inline json cot_record_to_json(const CoTRecord& c) {
  return {{"instance_id", c.instance_id},
          {"raw_cot", c.raw_cot},
          {"final_answer", c.final_answer ? json(std::string(1, *c.final_answer)) : json(nullptr)},
          {"model", c.model},
          {"run_index", c.run_index}};
}

inline CoTRecord cot_record_from_json(const json& j) {
  CoTRecord c;
  c.instance_id = j.at("instance_id").get<std::string>();
  c.raw_cot = j.at("raw_cot").get<std::string>();
  if (j.contains("final_answer") && !j.at("final_answer").is_null()) {
    const auto s = j.at("final_answer").get<std::string>();
    if (!s.empty()) c.final_answer = s[0];
  }
  c.model = j.value("model", "");
  c.run_index = j.value("run_index", 0);
  return c;
}

}  // namespace cot2el
