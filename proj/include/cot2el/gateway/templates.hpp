#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "cot2el/core/error.hpp"
#include "cot2el/core/types.hpp"
#include "cot2el/extract/el_set.hpp"
#include "cot2el/util/text.hpp"

namespace cot2el {

enum class TemplateId {
  NLI_CoT, NLI_GenEX, SIQA_CoT, SIQA_GenEX, CQA_CoT, CQA_GenEX,
  CoTParser, ELStructurer,
  DirectRank_NLI, DirectRank_SIQA, DirectRank_CQA,
  ScoreRank_NLI, ScoreRank_SIQA, ScoreRank_CQA,
  ELDirect_NLI, ELDirect_SIQA, ELDirect_CQA,
  ELLogits_NLI, ELLogits_SIQA, ELLogits_CQA,
  ELScore_NLI, ELScore_SIQA, ELScore_CQA,
};

namespace templates {

// Bodies use {name} placeholders. Line breaks are literal "\n"; there is no
// trailing whitespace after "Answer:" / "Rating:".

inline constexpr std::string_view kNliCoT =
    "Please determine whether the following statement is true (entailment), undetermined (neutral), or false "
    "(contradiction) given the context below and select ONE of the listed options and start your answer with a "
    "single letter.\n"
    "Context: {premise}\nStatement: {hypothesis}\nA. Entailment\nB. Neutral\nC. Contradiction\nAnswer:";

inline constexpr std::string_view kNliGenEX =
    "You are an expert in Natural Language Inference (NLI). Please list all possible explanations why the following "
    "statement is {target-label} given the context below without introductory phrases.\n"
    "Context: {premise}\nStatement: {hypothesis}\nAnswer:";

inline constexpr std::string_view kSiqaCoT =
    "Please read the following social scenario and the accompanying question, choose the most appropriate answer "
    "from the options provided and start your answer with a single letter.\n"
    "Scenario: {scenario}\nQuestion: {question}\nA. {answerA}\nB. {answerB}\nC. {answerC}\nAnswer:";

inline constexpr std::string_view kSiqaGenEX =
    "You are an expert in social intelligence question answering. Please list all possible explanations why the most "
    "appropriate answer is {target-label} given the following social scenario and the accompanying question below "
    "without introductory phrases.\n"
    "Scenario: {scenario}\nQuestion: {question}\nAnswer:";

inline constexpr std::string_view kCqaCoT =
    "Please read the following question, choose the most appropriate answer from the options provided and start your "
    "answer with a single letter.\n"
    "Question: {question}\nA. {answerA}\nB. {answerB}\nC. {answerC}\nD. {answerD}\nE. {answerE}\nAnswer:";

inline constexpr std::string_view kCqaGenEX =
    "You are an expert in commonsense question answering. Please list all possible explanations why the most "
    "appropriate answer is {target-label} given the question below without introductory phrases.\n"
    "Question: {question}\nAnswer:";

inline constexpr std::string_view kCoTParser =
    "The content of your reasoning process is below:\n{CoT}\nPlease extract and list all the original sentences from "
    "the aforementioned reasoning process that support and oppose each option separately.";

inline constexpr std::string_view kELStructurerSystem =
    "Convert the given markdown into a structured JSON where each option has two keys: support and oppose. Each key "
    "should map to a list of statements from the markdown that either support or oppose that option.\n"
    "\n"
    "EXAMPLE JSON OUTPUT:\n"
    "{\n"
    "  \"Option A\": {\n"
    "    \"support\": [\"SentenceA.1\",\"SentenceA.2\"],\n"
    "    \"oppose\": [\"SentenceA.3\"]\n"
    "  },\n"
    "  \"Option B\": {\n"
    "    \"support\": [\"SentenceB.1\"],\n"
    "    \"oppose\": []\n"
    "  },\n"
    "  ...\n"
    "}";

inline constexpr std::string_view kDirectNli =
    "Please assess whether the following statement is true (entailment), undetermined (neutral), or false "
    "(contradiction) given the context below, rank all the following options from most appropriate to least "
    "appropriate. Only output the letters representing the options, separated by spaces.\n"
    "Context: {premise}\nStatement: {hypothesis}\nA. Entailment\nB. Neutral\nC. Contradiction\nAnswer:";

inline constexpr std::string_view kDirectSiqa =
    "Please read the following social scenario and the accompanying question, rank all the following options from "
    "best to worst based on relevance and appropriateness. Only output the letters representing the options, "
    "separated by spaces.\n"
    "Scenario: {scenario}\nQuestion: {question}\nA. {answerA}\nB. {answerB}\nC. {answerC}\nAnswer:";

inline constexpr std::string_view kDirectCqa =
    "Please read the following question, rank all the following options from best to worst based on relevance and "
    "appropriateness. Only output the letters representing the options, separated by spaces.\n"
    "Question: {question}\nA. {answerA}\nB. {answerB}\nC. {answerC}\nD. {answerD}\nE. {answerE}\nAnswer:";

#define COT2EL_RATING_SCALE \
  "Plausibility Ratings:\n1 = Impossible\n2 = Technically Possible\n3 = Plausible\n4 = Likely\n5 = Very Likely\n"

inline constexpr std::string_view kScoreNli =
    "Please rate the following answer based on its plausibility in representing the relationship between the "
    "context and the statement on the 5-Point Scale rating as below. Only output a single integer corresponding to "
    "your evaluation.\n"
    "Context: {premise}\nStatement: {hypothesis}\nAnswer: {target-label}\n" COT2EL_RATING_SCALE "Rating:";

inline constexpr std::string_view kScoreSiqa =
    "Please read the following social scenario and the accompanying question, rate the plausibility of the answer on "
    "the 5-Point Scale rating as below. Only output a single integer corresponding to your evaluation.\n"
    "Scenario: {scenario}\nQuestion: {question}\nAnswer: {target-label}\n" COT2EL_RATING_SCALE "Rating:";

inline constexpr std::string_view kScoreCqa =
    "Please read the following question, rate the plausibility of the answer on the 5-Point Scale rating as below. "
    "Only output a single integer corresponding to your evaluation.\n"
    "Question: {question}\nAnswer: {target-label}\n" COT2EL_RATING_SCALE "Rating:";

#define COT2EL_CONSIDER \
  "Consider relevant perspectives, possible explanations, or reasoning patterns in the following explanations."

inline constexpr std::string_view kELDirectNli =
    "Please assess whether the following statement is true (entailment), undetermined (neutral), or false "
    "(contradiction) given the context below. " COT2EL_CONSIDER " Rank all the following options from most "
    "appropriate to least appropriate. Only output the letters representing the options, separated by spaces.\n"
    "Context: {premise}\nStatement: {hypothesis}\nA. Entailment\nB. Neutral\nC. Contradiction\n"
    "Explanations: {explanation-label-pairs}\nAnswer:";

inline constexpr std::string_view kELLogitsNli =
    "Please determine whether the following statement is true (entailment), undetermined (neutral), or false "
    "(contradiction) given the context below. " COT2EL_CONSIDER " Select ONE of the listed options and start your "
    "answer with a single letter.\n"
    "Context: {premise}\nStatement: {hypothesis}\nA. Entailment\nB. Neutral\nC. Contradiction\n"
    "Explanations: {explanation-label-pairs}\nAnswer:";

inline constexpr std::string_view kELScoreNli =
    "Please rate the following answer based on its plausibility in representing the relationship between the "
    "context and the statement on the 5-Point Scale rating as below. " COT2EL_CONSIDER " Only output a single "
    "integer corresponding to your evaluation.\n"
    "Context: {premise}\nStatement: {hypothesis}\nAnswer: {target-label}\n" COT2EL_RATING_SCALE
    "Explanations: {explanation-label-pairs}\nRating:";

inline constexpr std::string_view kELDirectSiqa =
    "Please read the following social scenario and the accompanying question. " COT2EL_CONSIDER " Rank all the "
    "following options from best to worst based on relevance and appropriateness. Only output the letters "
    "representing the options, separated by spaces.\n"
    "Scenario: {scenario}\nQuestion: {question}\nA. {answerA}\nB. {answerB}\nC. {answerC}\n"
    "Explanations: {explanation-label-pairs}\nAnswer:";

inline constexpr std::string_view kELLogitsSiqa =
    "Please read the following social scenario and the accompanying question. " COT2EL_CONSIDER " Choose the most "
    "appropriate answer from the options provided and start your answer with a single letter.\n"
    "Scenario: {scenario}\nQuestion: {question}\nA. {answerA}\nB. {answerB}\nC. {answerC}\n"
    "Explanations: {explanation-label-pairs}\nAnswer:";

inline constexpr std::string_view kELScoreSiqa =
    "Please read the following social scenario and the accompanying question, rate the plausibility of the answer on "
    "the 5-Point Scale rating as below. " COT2EL_CONSIDER " Only output a single integer corresponding to your "
    "evaluation.\n"
    "Scenario: {scenario}\nQuestion: {question}\nAnswer: {target-label}\n" COT2EL_RATING_SCALE
    "Explanations: {explanation-label-pairs}\nRating:";

inline constexpr std::string_view kELDirectCqa =
    "Please read the following question. " COT2EL_CONSIDER " Rank all the following options from best to worst "
    "based on relevance and appropriateness. Only output the letters representing the options, separated by "
    "spaces.\n"
    "Question: {question}\nA. {answerA}\nB. {answerB}\nC. {answerC}\nD. {answerD}\nE. {answerE}\n"
    "Explanations: {explanation-label-pairs}\nAnswer:";

inline constexpr std::string_view kELLogitsCqa =
    "Please read the following question. " COT2EL_CONSIDER " Choose the most appropriate answer from the options "
    "provided and start your answer with a single letter.\n"
    "Question: {question}\nA. {answerA}\nB. {answerB}\nC. {answerC}\nD. {answerD}\nE. {answerE}\n"
    "Explanations: {explanation-label-pairs}\nAnswer:";

inline constexpr std::string_view kELScoreCqa =
    "Please read the following question, rate the plausibility of the answer on the 5-Point Scale rating as below. "
    COT2EL_CONSIDER " Only output a single integer corresponding to your evaluation.\n"
    "Question: {question}\nAnswer: {target-label}\n" COT2EL_RATING_SCALE
    "Explanations: {explanation-label-pairs}\nRating:";

#undef COT2EL_CONSIDER
#undef COT2EL_RATING_SCALE

}  // namespace templates

struct TemplateInfo {
  std::string_view body;
  std::optional<SchemaKind> schema;  // nullopt: schema independent
};

inline TemplateInfo template_info(TemplateId id) {
  using namespace templates;
  using S = SchemaKind;
  switch (id) {
    case TemplateId::NLI_CoT: return {kNliCoT, S::NLI};
    case TemplateId::NLI_GenEX: return {kNliGenEX, S::NLI};
    case TemplateId::SIQA_CoT: return {kSiqaCoT, S::SIQA};
    case TemplateId::SIQA_GenEX: return {kSiqaGenEX, S::SIQA};
    case TemplateId::CQA_CoT: return {kCqaCoT, S::CQA};
    case TemplateId::CQA_GenEX: return {kCqaGenEX, S::CQA};
    case TemplateId::CoTParser: return {kCoTParser, std::nullopt};
    case TemplateId::ELStructurer: return {kELStructurerSystem, std::nullopt};
    case TemplateId::DirectRank_NLI: return {kDirectNli, S::NLI};
    case TemplateId::DirectRank_SIQA: return {kDirectSiqa, S::SIQA};
    case TemplateId::DirectRank_CQA: return {kDirectCqa, S::CQA};
    case TemplateId::ScoreRank_NLI: return {kScoreNli, S::NLI};
    case TemplateId::ScoreRank_SIQA: return {kScoreSiqa, S::SIQA};
    case TemplateId::ScoreRank_CQA: return {kScoreCqa, S::CQA};
    case TemplateId::ELDirect_NLI: return {kELDirectNli, S::NLI};
    case TemplateId::ELDirect_SIQA: return {kELDirectSiqa, S::SIQA};
    case TemplateId::ELDirect_CQA: return {kELDirectCqa, S::CQA};
    case TemplateId::ELLogits_NLI: return {kELLogitsNli, S::NLI};
    case TemplateId::ELLogits_SIQA: return {kELLogitsSiqa, S::SIQA};
    case TemplateId::ELLogits_CQA: return {kELLogitsCqa, S::CQA};
    case TemplateId::ELScore_NLI: return {kELScoreNli, S::NLI};
    case TemplateId::ELScore_SIQA: return {kELScoreSiqa, S::SIQA};
    case TemplateId::ELScore_CQA: return {kELScoreCqa, S::CQA};
  }
  throw Error("unknown template id");
}

inline SchemaKind schema_of(const Instance& inst) {
  if (inst.task_kind == TaskKind::NLI) return SchemaKind::NLI;
  return inst.options.size() == 5 ? SchemaKind::CQA : SchemaKind::SIQA;
}

enum class PromptKind { CoT, GenEX, DirectRank, Logits, Score };

/// Template for a prompt kind on a schema, optionally the EL-injected variant.
inline TemplateId template_for(PromptKind kind, SchemaKind schema, bool with_el = false) {
  const int s = schema == SchemaKind::NLI ? 0 : schema == SchemaKind::SIQA ? 1 : 2;
  auto pick = [s](TemplateId a, TemplateId b, TemplateId c) { return s == 0 ? a : s == 1 ? b : c; };
  using T = TemplateId;
  switch (kind) {
    case PromptKind::CoT:
      return pick(T::NLI_CoT, T::SIQA_CoT, T::CQA_CoT);
    case PromptKind::GenEX:
      return pick(T::NLI_GenEX, T::SIQA_GenEX, T::CQA_GenEX);
    case PromptKind::DirectRank:
      return with_el ? pick(T::ELDirect_NLI, T::ELDirect_SIQA, T::ELDirect_CQA)
                     : pick(T::DirectRank_NLI, T::DirectRank_SIQA, T::DirectRank_CQA);
    case PromptKind::Logits:
      return with_el ? pick(T::ELLogits_NLI, T::ELLogits_SIQA, T::ELLogits_CQA)
                     : pick(T::NLI_CoT, T::SIQA_CoT, T::CQA_CoT);
    case PromptKind::Score:
      return with_el ? pick(T::ELScore_NLI, T::ELScore_SIQA, T::ELScore_CQA)
                     : pick(T::ScoreRank_NLI, T::ScoreRank_SIQA, T::ScoreRank_CQA);
  }
  throw Error("unknown prompt kind");
}

/// Substitutes {name} placeholders in one pass over `body`; substituted values
/// are never rescanned. Throws when a placeholder has no binding.
inline std::string substitute(std::string_view body, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(body.size() + 256);
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      const auto close = body.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = body.substr(i + 1, close - i - 1);
        const bool is_placeholder =
            !name.empty() && name.find_first_of(" \n\"{") == std::string_view::npos;
        if (is_placeholder) {
          auto it = bindings.find(std::string(name));
          if (it == bindings.end()) throw ValidationError("missing binding for placeholder {" + std::string(name) + "}");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(body[i]);
    ++i;
  }
  return out;
}

/// Serialized EL block: one line per option,
/// "Option <letter> (<text>): support: [s1; s2] oppose: [o1]". Stance subsets
/// and GenEX sets omit the stance they do not carry. All-empty sets render "".
inline std::string serialize_el(const ELSet& el, const Instance& inst) {
  if (el.empty()) return "";
  const bool show_support = el.scope != StanceScope::OpposeOnly;
  const bool show_oppose = el.scope != StanceScope::SupportOnly && el.provenance != Provenance::GenEX;
  std::string out;
  for (const auto& opt : inst.options) {
    const auto* ex = el.find(opt.letter);
    static const std::vector<std::string> kNone;
    const auto& sup = ex ? ex->support : kNone;
    const auto& opp = ex ? ex->oppose : kNone;
    if (!out.empty()) out += '\n';
    out += "Option ";
    out += opt.letter;
    out += " (" + opt.text + "):";
    if (show_support) out += " support: [" + text::join(sup, "; ") + "]";
    if (show_oppose) out += " oppose: [" + text::join(opp, "; ") + "]";
  }
  return out;
}

namespace detail {

inline bool template_has(std::string_view body, std::string_view placeholder) {
  return body.find(placeholder) != std::string_view::npos;
}

inline std::string render_impl(TemplateId id, const Instance& inst, const std::optional<std::string>& explanations,
                               const OptionDef* target) {
  const auto info = template_info(id);
  if (info.schema && *info.schema != schema_of(inst))
    throw ValidationError(std::string("template is for schema ") + to_string(*info.schema) + ", instance " + inst.id +
                          " is " + to_string(schema_of(inst)));
  const bool wants_el = template_has(info.body, "{explanation-label-pairs}");
  const bool wants_target = template_has(info.body, "{target-label}");
  if (explanations && !wants_el) throw ValidationError("template accepts no EL binding");
  if (target && !wants_target) throw ValidationError("template accepts no target-label binding");

  std::map<std::string, std::string> b;
  b["question"] = inst.question;
  if (inst.task_kind == TaskKind::NLI) {
    b["hypothesis"] = inst.question;
    if (inst.context) b["premise"] = *inst.context;
  } else if (inst.context) {
    b["scenario"] = *inst.context;
  }
  for (const auto& o : inst.options) b[std::string("answer") + o.letter] = o.text;
  if (target) {
    const bool genex = id == TemplateId::NLI_GenEX || id == TemplateId::SIQA_GenEX || id == TemplateId::CQA_GenEX;
    b["target-label"] = (genex && inst.task_kind == TaskKind::NLI) ? text::to_lower(target->text) : target->text;
  }
  if (explanations) b["explanation-label-pairs"] = *explanations;
  return substitute(info.body, b);
}

}  // namespace detail

/// Renders an instance-bound template. GenEX and score templates need `target`;
/// EL-injected templates need `el`.
inline std::string render_prompt(TemplateId id, const Instance& inst, const ELSet* el = nullptr,
                                 const OptionDef* target = nullptr) {
  if (id == TemplateId::CoTParser || id == TemplateId::ELStructurer)
    throw ValidationError("parser/structurer templates are not instance-bound");
  std::optional<std::string> ex;
  if (el) ex = serialize_el(*el, inst);
  return detail::render_impl(id, inst, ex, target);
}

/// Same as render_prompt but injects free text (e.g. the raw parser listing)
/// into the explanations slot.
inline std::string render_prompt_with_text(TemplateId id, const Instance& inst, const std::string& explanations,
                                           const OptionDef* target = nullptr) {
  return detail::render_impl(id, inst, explanations, target);
}

inline std::string render_parser_prompt(std::string_view cot) {
  return substitute(templates::kCoTParser, {{"CoT", std::string(cot)}});
}

inline std::string structurer_system_prompt() { return std::string(templates::kELStructurerSystem); }

}  // namespace cot2el
