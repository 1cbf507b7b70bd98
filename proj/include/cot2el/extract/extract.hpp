#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cot2el/core/types.hpp"
#include "cot2el/extract/el_set.hpp"
#include "cot2el/extract/repair.hpp"
#include "cot2el/gateway/gateway.hpp"
#include "cot2el/gateway/templates.hpp"
#include "cot2el/util/text.hpp"

namespace cot2el {

struct ExtractionConfig {
  std::string reasoning_model = "reasoning";
  std::string base_model = "base";
  double temperature = 0.0;
  int max_tokens = 8192;
  int run_index = 0;
};

struct ReasoningSplit {
  std::string reasoning;
  std::string answer_text;
};

namespace detail {

inline bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Index of the last line that opens with an "Answer:" / "Final answer:" marker.
inline std::optional<std::size_t> find_answer_marker(std::string_view s) {
  std::optional<std::size_t> found;
  std::size_t line_start = 0;
  while (line_start <= s.size()) {
    auto line_end = s.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = s.size();
    std::string line = text::to_lower(text::trim_view(s.substr(line_start, line_end - line_start)));
    while (!line.empty() && (line.front() == '*' || line.front() == '#')) line.erase(0, 1);
    for (std::string_view marker : {"final answer", "answer"}) {
      if (line.starts_with(marker)) {
        std::size_t k = marker.size();
        while (k < line.size() && (line[k] == '*' || line[k] == ' ')) ++k;
        if (k < line.size() && line[k] == ':') found = line_start;
        break;
      }
    }
    if (line_end == s.size()) break;
    line_start = line_end + 1;
  }
  return found;
}

}  // namespace detail

/// Separates the reasoning trace from the trailing answer: provider-separated
/// reasoning first, then a </think> tag, then a final "Answer:" line; otherwise
/// the whole text is reasoning and the last non-empty line is the answer.
inline ReasoningSplit split_reasoning(const Completion& c) {
  if (c.reasoning && !text::trim_view(*c.reasoning).empty()) return {text::trim(*c.reasoning), c.text};
  const std::string& t = c.text;
  if (auto pos = t.find("</think>"); pos != std::string::npos) {
    std::string r = t.substr(0, pos);
    if (auto open = r.find("<think>"); open != std::string::npos) r = r.substr(open + 7);
    return {text::trim(r), t.substr(pos + 8)};
  }
  if (auto marker = detail::find_answer_marker(t)) return {text::trim(t.substr(0, *marker)), t.substr(*marker)};
  const auto lines = text::split_lines(t);
  std::string last;
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    if (!text::trim_view(*it).empty()) {
      last = text::trim(*it);
      break;
    }
  }
  return {text::trim(t), last};
}

/// Reply text without any inline <think>...</think> block. Separately
/// returned reasoning is already excluded from `text`.
inline std::string answer_body(const Completion& c) {
  if (auto pos = c.text.find("</think>"); pos != std::string::npos) return text::trim(c.text.substr(pos + 8));
  return c.text;
}

/// Option letter chosen in `answer_text`: "answer is X" / "answer: X" first,
/// otherwise the first standalone option letter.
inline std::optional<char> find_final_answer(std::string_view answer_text, const Instance& inst) {
  auto valid = [&](char c) { return inst.index_of(c).has_value(); };
  auto standalone_at = [&](std::size_t i) {
    const bool left_ok = i == 0 || !detail::is_alnum(answer_text[i - 1]);
    const bool right_ok = i + 1 >= answer_text.size() || !detail::is_alnum(answer_text[i + 1]);
    return left_ok && right_ok;
  };
  const std::string lower = text::to_lower(answer_text);
  for (std::string_view cue : {"answer is", "answer:"}) {
    std::size_t pos = 0;
    while ((pos = lower.find(cue, pos)) != std::string::npos) {
      std::size_t k = pos + cue.size();
      while (k < answer_text.size() && (text::is_space(answer_text[k]) || answer_text[k] == '*' || answer_text[k] == '('))
        ++k;
      if (k < answer_text.size() && valid(answer_text[k]) && standalone_at(k)) return answer_text[k];
      pos += cue.size();
    }
  }
  for (std::size_t i = 0; i < answer_text.size(); ++i)
    if (valid(answer_text[i]) && standalone_at(i)) return answer_text[i];
  return std::nullopt;
}

/// Asks the reasoning model for a trace on the instance's task prompt.
inline CoTRecord generate_cot(Gateway& gw, const Instance& inst, const ExtractionConfig& cfg) {
  CompletionRequest req;
  req.model = cfg.reasoning_model;
  req.prompt = render_prompt(template_for(PromptKind::CoT, schema_of(inst)), inst);
  req.temperature = cfg.temperature;
  req.max_tokens = cfg.max_tokens;
  req.run_index = cfg.run_index;
  const auto completion = gw.complete(req);
  if (text::trim_view(completion.text).empty() && (!completion.reasoning || text::trim_view(*completion.reasoning).empty()))
    throw Error("empty completion for instance " + inst.id);
  auto split = split_reasoning(completion);
  if (split.reasoning.empty()) throw Error("completion for instance " + inst.id + " has no reasoning before the answer");
  CoTRecord rec;
  rec.instance_id = inst.id;
  rec.raw_cot = std::move(split.reasoning);
  rec.final_answer = find_final_answer(split.answer_text, inst);
  rec.model = cfg.reasoning_model;
  rec.run_index = cfg.run_index;
  return rec;
}

/// Asks the reasoning model to list supporting/opposing sentences per option.
inline std::string parse_cot(Gateway& gw, const CoTRecord& cot, const ExtractionConfig& cfg) {
  if (text::trim_view(cot.raw_cot).empty()) throw ValidationError("cannot parse an empty CoT");
  CompletionRequest req;
  req.model = cfg.reasoning_model;
  req.prompt = render_parser_prompt(cot.raw_cot);
  req.temperature = cfg.temperature;
  req.max_tokens = cfg.max_tokens;
  req.run_index = cfg.run_index;
  const auto body = answer_body(gw.complete(req));
  if (text::trim_view(body).empty()) throw Error("empty parser reply for instance " + cot.instance_id);
  return body;
}

/// Maps "A", "A.", "A) text", "Option A", "option a", or the option surface
/// text (case-insensitive) to the option letter.
inline std::optional<char> normalize_option_key(std::string_view key, const Instance& inst) {
  std::string k = text::collapse_whitespace(key);
  for (const auto& o : inst.options)
    if (text::iequals(k, text::collapse_whitespace(o.text))) return o.letter;
  std::string rest = k;
  if (text::to_lower(rest.substr(0, 6)) == "option") {
    rest = text::trim(rest.substr(6));
  }
  if (rest.empty()) return std::nullopt;
  char c = rest[0];
  const bool single = rest.size() == 1;
  if (single) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (!single && detail::is_alnum(rest[1])) return std::nullopt;
  if (inst.index_of(c)) return c;
  return std::nullopt;
}

struct StructureResult {
  ELSet el;
  std::vector<std::string> warnings;
};

namespace detail {

inline void append_statements(const json& v, std::vector<std::string>& out, std::vector<std::string>& warnings) {
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array()) {
    for (const auto& item : v) {
      if (item.is_string()) out.push_back(item.get<std::string>());
      else if (!item.is_null()) warnings.push_back("non-string statement skipped: " + item.dump());
    }
  } else if (!v.is_null()) {
    warnings.push_back("unexpected stance value skipped: " + v.dump());
  }
}

}  // namespace detail

/// Converts a parsed structurer document into a Raw ELSet for `inst`.
inline StructureResult el_from_document(const json& doc, const Instance& inst) {
  if (!doc.is_object()) throw ValidationError("unstructurable: document is not an object");
  StructureResult res{ELSet::empty_for(inst, Provenance::Raw), {}};
  std::size_t matched = 0;
  for (const auto& [key, value] : doc.items()) {
    const auto letter = normalize_option_key(key, inst);
    if (!letter) {
      res.warnings.push_back("dropped unmatched option key '" + key + "'");
      continue;
    }
    ++matched;
    auto* slot = res.el.find(*letter);
    if (!value.is_object()) {
      res.warnings.push_back("option '" + key + "' is not an object");
      continue;
    }
    for (const auto& [stance_key, stance_val] : value.items()) {
      const auto sk = text::to_lower(stance_key);
      if (sk.starts_with("support")) detail::append_statements(stance_val, slot->support, res.warnings);
      else if (sk.starts_with("oppos")) detail::append_statements(stance_val, slot->oppose, res.warnings);
      else res.warnings.push_back("unknown stance key '" + stance_key + "' under '" + key + "'");
    }
  }
  if (!doc.empty() && matched == 0) throw ValidationError("no option key in the document matches instance " + inst.id);
  for (auto& o : res.el.options) {
    o.support = dedup_explanations(o.support);
    o.oppose = dedup_explanations(o.oppose);
  }
  return res;
}

/// Runs the base-model structurer on the parser listing and normalizes the result.
inline StructureResult structure_el(Gateway& gw, const std::string& parser_text, const Instance& inst,
                                    const ExtractionConfig& cfg) {
  if (text::trim_view(parser_text).empty()) throw ValidationError("parser text is empty");
  CompletionRequest req;
  req.model = cfg.base_model;
  req.system_prompt = structurer_system_prompt();
  req.prompt = parser_text;
  req.temperature = cfg.temperature;
  req.max_tokens = cfg.max_tokens;
  req.run_index = cfg.run_index;
  const auto c = gw.complete(req);
  return el_from_document(repair_el_document(c.text), inst);
}

/// Splits a bulleted or numbered list into items ("1. x", "- y", "(2) z", plain lines).
inline std::vector<std::string> split_explanation_lines(std::string_view reply) {
  std::vector<std::string> items;
  for (const auto& raw : text::split_lines(reply)) {
    std::string_view line = text::trim_view(raw);
    if (line.starts_with("- ") || line.starts_with("* ") || line.starts_with("\xE2\x80\xA2")) {
      line.remove_prefix(line.starts_with("\xE2\x80\xA2") ? 3 : 2);
    } else {
      std::size_t k = 0;
      const bool paren = !line.empty() && line[0] == '(';
      if (paren) ++k;
      std::size_t digits = k;
      while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
      const bool delim = digits > k && digits < line.size() &&
                         (line[digits] == '.' || line[digits] == ')' || line[digits] == ':');
      if (delim && (digits + 1 == line.size() || text::is_space(line[digits + 1]))) line.remove_prefix(digits + 1);
    }
    line = text::trim_view(line);
    if (!line.empty()) items.emplace_back(line);
  }
  return dedup_explanations(items);
}

struct GenexResult {
  std::vector<std::string> explanations;
  std::vector<std::string> warnings;
};

/// Reverse-paradigm baseline: explanations conditioned on one given label.
inline GenexResult generate_genex(Gateway& gw, const Instance& inst, const OptionDef& target, const std::string& model,
                                  const ExtractionConfig& cfg) {
  CompletionRequest req;
  req.model = model;
  req.prompt = render_prompt(template_for(PromptKind::GenEX, schema_of(inst)), inst, nullptr, &target);
  req.temperature = cfg.temperature;
  req.max_tokens = cfg.max_tokens;
  req.run_index = cfg.run_index;
  GenexResult res;
  res.explanations = split_explanation_lines(answer_body(gw.complete(req)));
  if (res.explanations.empty())
    res.warnings.push_back("GenEX reply for " + inst.id + " option " + std::string(1, target.letter) + " is empty");
  return res;
}

/// GenEX for every option, assembled as a support-only set.
inline StructureResult genex_el_set(Gateway& gw, const Instance& inst, const std::string& model,
                                    const ExtractionConfig& cfg) {
  StructureResult res{ELSet::empty_for(inst, Provenance::GenEX), {}};
  for (const auto& opt : inst.options) {
    auto g = generate_genex(gw, inst, opt, model, cfg);
    res.el.find(opt.letter)->support = std::move(g.explanations);
    for (auto& w : g.warnings) res.warnings.push_back(std::move(w));
  }
  return res;
}

}  // namespace cot2el
