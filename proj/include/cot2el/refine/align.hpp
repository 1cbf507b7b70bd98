#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/discourse/segment.hpp"
#include "cot2el/extract/el_set.hpp"
#include "cot2el/refine/similarity.hpp"

namespace cot2el {

using json = nlohmann::json;

struct AlignmentRecord {
  std::string original;
  std::string aligned_unit;  // empty when dropped by the ratio floor
  double ratio = 0.0;
  char letter = 'A';
  Stance stance = Stance::Support;
  std::size_t unit_start = 0;
  std::size_t unit_end = 0;
  bool kept = true;
};

struct AlignmentResult {
  ELSet el;
  std::vector<AlignmentRecord> records;
};

/// Index of the unit most similar to `explanation`; ties go to the earliest
/// start, then the shortest span.
inline std::pair<std::size_t, double> best_unit(const std::string& explanation, const UnitSet& u) {
  std::size_t best = 0;
  double best_ratio = -1.0;
  for (std::size_t k = 0; k < u.units.size(); ++k) {
    const auto& s = u.units[k];
    const double r = similarity_ratio(s.text, explanation);
    if (r > best_ratio) {
      best = k;
      best_ratio = r;
      continue;
    }
    if (r == best_ratio) {
      const auto& cur = u.units[best];
      if (s.start < cur.start || (s.start == cur.start && s.end - s.start < cur.end - cur.start)) best = k;
    }
  }
  return {best, best_ratio};
}

/// Replaces every explanation by its closest unit and collapses duplicates per
/// (option, stance) list. With `min_ratio` > 0, explanations whose best ratio
/// falls below it are dropped instead.
inline AlignmentResult align_to_units(const ELSet& el, const UnitSet& u, double min_ratio = 0.0) {
  if (u.units.empty() && !el.empty()) throw ValidationError("no units to align against");
  AlignmentResult out;
  out.el = el;
  out.el.provenance = Provenance::Filtered;
  for (auto& opt : out.el.options) {
    for (auto stance : {Stance::Support, Stance::Oppose}) {
      auto& list = opt.list(stance);
      std::vector<std::string> replaced;
      std::set<std::string> seen;
      for (const auto& e : list) {
        const auto [k, ratio] = best_unit(e, u);
        const auto& unit = u.units[k];
        AlignmentRecord rec{e, unit.text, ratio, opt.letter, stance, unit.start, unit.end, true};
        if (min_ratio > 0.0 && ratio < min_ratio) {
          rec.kept = false;
          rec.aligned_unit.clear();
        } else if (seen.insert(unit.text).second) {
          replaced.push_back(unit.text);
        }
        out.records.push_back(std::move(rec));
      }
      list = std::move(replaced);
    }
  }
  return out;
}

/// Keeps one stance; the other lists are emptied and the scope recorded.
inline ELSet stance_subset(const ELSet& el, Stance stance) {
  ELSet out = el;
  for (auto& opt : out.options) opt.list(stance == Stance::Support ? Stance::Oppose : Stance::Support).clear();
  out.scope = stance == Stance::Support ? StanceScope::SupportOnly : StanceScope::OpposeOnly;
  return out;
}

inline json alignment_record_to_json(const AlignmentRecord& r) {
  return {{"option", std::string(1, r.letter)},
          {"stance", to_string(r.stance)},
          {"original", r.original},
          {"aligned_unit", r.kept ? json(r.aligned_unit) : json(nullptr)},
          {"unit_span", {r.unit_start, r.unit_end}},
          {"ratio", r.ratio}};
}

}  // namespace cot2el
