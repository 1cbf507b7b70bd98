#include <gtest/gtest.h>

#include "cot2el/extract/extract.hpp"
#include "cot2el/gateway/mock_provider.hpp"
#include "test_support.hpp"

using namespace cot2el;

namespace {

std::shared_ptr<MockProvider> mock_with(const json& rules) { return std::make_shared<MockProvider>(rules); }

Gateway gateway_for(const json& rules) {
  return Gateway(mock_with(rules), nullptr, RetryPolicy{1, std::chrono::milliseconds(0), 1.0});
}

json reply(const std::string& text) { return {{"match", json::object()}, {"response", {{"text", text}}}}; }

Completion completion(const std::string& text) {
  Completion c;
  c.text = text;
  return c;
}

}  // namespace

TEST(GenerateCoT, ReplaysTheAshTrace) {
  const auto cot = testing_support::read_file(testing_support::source_path("tests/fixtures/siqa_ash_cot.txt"));
  auto gw = gateway_for(json::array({reply(cot)}));
  const auto rec = generate_cot(gw, testing_support::ash_instance(), {});
  EXPECT_TRUE(rec.raw_cot.starts_with("Okay, let's see."));
  ASSERT_TRUE(rec.final_answer);
  EXPECT_EQ(*rec.final_answer, 'B');
}

TEST(GenerateCoT, AnswerWithoutReasoningIsAnError) {
  auto gw = gateway_for(json::array({reply("Answer: B")}));
  EXPECT_THROW(generate_cot(gw, testing_support::ash_instance(), {}), Error);
  auto empty = gateway_for(json::array({reply("  \n")}));
  EXPECT_THROW(generate_cot(empty, testing_support::ash_instance(), {}), Error);
}

TEST(SplitReasoning, PrefersProviderReasoningThenThinkTags) {
  auto c = completion("B");
  c.reasoning = "because";
  EXPECT_EQ(split_reasoning(c).reasoning, "because");
  const auto t = split_reasoning(completion("<think>\nhmm\n</think>\nB"));
  EXPECT_EQ(t.reasoning, "hmm");
  EXPECT_EQ(t.answer_text, "\nB");
  const auto m = split_reasoning(completion("x then y\n**Final Answer:** C"));
  EXPECT_EQ(m.reasoning, "x then y");
  EXPECT_EQ(m.answer_text, "**Final Answer:** C");
}

TEST(FinalAnswer, CueBeatsEarlierStandaloneLetters) {
  const auto inst = testing_support::ash_instance();
  EXPECT_EQ(find_final_answer("I think the best answer is B. Accomplished.", inst), 'B');
  EXPECT_EQ(find_final_answer("A seems weak; answer: (C)", inst), 'C');
  EXPECT_EQ(find_final_answer("Because", inst), std::nullopt);
  EXPECT_EQ(find_final_answer("maybe E", inst), std::nullopt);
}

TEST(Repair, FencesProseTrailingCommasAndSmartQuotes) {
  EXPECT_EQ(repair_el_document("```json\n{\"a\": [1, 2,],}\n```"), json::parse(R"({"a":[1,2]})"));
  EXPECT_EQ(repair_el_document("Sure! {\"a\": \"x, }\"} done"), json::parse(R"({"a":"x, }"})"));
  EXPECT_EQ(repair_el_document("{\xE2\x80\x9C" "a\xE2\x80\x9D: \xE2\x80\x9C" "b\xE2\x80\x9D}"), json::parse(R"({"a":"b"})"));
}

TEST(Repair, UnparseableReportsOffset) {
  try {
    repair_el_document("xx{\"a\": 1 2}");  // the stray 2 sits at offset 10
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("unstructurable"), std::string::npos);
    EXPECT_NE(msg.find("offset 10"), std::string::npos) << msg;
  }
  EXPECT_THROW(repair_el_document("no braces"), ValidationError);
  EXPECT_THROW(repair_el_document(""), ValidationError);
}

TEST(OptionKeys, AcceptedForms) {
  const auto inst = testing_support::ash_instance();
  for (const char* k : {"A", "a", "A.", "A) relieved", "Option A", "option a", "relieved", "RELIEVED"})
    EXPECT_EQ(normalize_option_key(k, inst), 'A') << k;
  for (const char* k : {"Option F", "Alpha", "", "Option"}) EXPECT_EQ(normalize_option_key(k, inst), std::nullopt) << k;
}

TEST(StructureEl, NormalizesKeysAndFillsMissingOptions) {
  const auto inst = testing_support::ash_instance();
  const auto doc = json::parse(R"({"Option A": {"supporting": ["s1", "s1 ", "s2"], "opposing": ["o1"]},
                                   "Option B": {"supporting": "only", "opposing": []}})");
  const auto res = el_from_document(doc, inst);
  EXPECT_EQ(res.el.provenance, Provenance::Raw);
  ASSERT_EQ(res.el.options.size(), 3u);
  EXPECT_EQ(res.el.options[0].support, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(res.el.options[0].oppose, (std::vector<std::string>{"o1"}));
  EXPECT_EQ(res.el.options[1].support, (std::vector<std::string>{"only"}));
  EXPECT_TRUE(res.el.options[2].support.empty() && res.el.options[2].oppose.empty());
  EXPECT_NO_THROW(validate_el_set(res.el, inst));
}

TEST(StructureEl, UnmatchedKeyIsDroppedWithWarning) {
  const auto inst = testing_support::ash_instance();
  const auto res = el_from_document(json::parse(R"({"Option A": {"supporting": ["x"]}, "Option F": {"supporting": ["y"]}})"), inst);
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_NE(res.warnings[0].find("Option F"), std::string::npos);
  EXPECT_EQ(res.el.explanation_count(), 1u);
  EXPECT_THROW(el_from_document(json::parse(R"({"Option F": {}})"), inst), ValidationError);
}

TEST(StructureEl, RunsThroughTheGatewayWithTheStructurerSystemPrompt) {
  auto gw = gateway_for(json::array(
      {{{"match", {{"system_contains", "JSON"}}},
        {"response", {{"text", "```json\n{\"Option C\": {\"supporting\": [\"proud\"], \"opposing\": [],},}\n```"}}}}}));
  const auto res = structure_el(gw, "A: ...", testing_support::ash_instance(), {});
  EXPECT_EQ(res.el.options[2].support, (std::vector<std::string>{"proud"}));
  EXPECT_THROW(structure_el(gw, " ", testing_support::ash_instance(), {}), ValidationError);
}

TEST(ParseCoT, ReturnsTheListingAndMentionsEveryOption) {
  auto gw = gateway_for(json::array({reply("Option A: ...\nOption B: ...\nOption C: ...")}));
  CoTRecord rec{"siqa-ash", "Okay, let's see.", 'B', "r", 0};
  const auto text = parse_cot(gw, rec, {});
  for (const char* o : {"Option A", "Option B", "Option C"}) EXPECT_NE(text.find(o), std::string::npos);
  rec.raw_cot = "";
  EXPECT_THROW(parse_cot(gw, rec, {}), ValidationError);
}

TEST(Genex, NumberedLinesBecomeItems) {
  EXPECT_EQ(split_explanation_lines("1. x\n2. y"), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(split_explanation_lines("- a\n* b\n(3) c\n\nplain"), (std::vector<std::string>{"a", "b", "c", "plain"}));
  EXPECT_EQ(split_explanation_lines("3.5 is a number"), (std::vector<std::string>{"3.5 is a number"}));
}

TEST(Genex, PromptAndEmptyReply) {
  const auto inst = testing_support::nli_instance();
  auto gw = gateway_for(json::array({{{"match", {{"contains", "why the following statement is"}}}, {"response", {{"text", ""}}}}}));
  const auto res = generate_genex(gw, inst, inst.options[1], "base", {});
  EXPECT_TRUE(res.explanations.empty());
  ASSERT_EQ(res.warnings.size(), 1u);
}

TEST(Genex, AssemblesSupportOnlySet) {
  const auto inst = testing_support::ash_instance();
  auto gw = gateway_for(json::array({reply("1. x\n2. y")}));
  const auto res = genex_el_set(gw, inst, "base", {});
  EXPECT_EQ(res.el.provenance, Provenance::GenEX);
  for (const auto& o : res.el.options) {
    EXPECT_EQ(o.support, (std::vector<std::string>{"x", "y"}));
    EXPECT_TRUE(o.oppose.empty());
  }
}

TEST(ELSetJson, RoundTripKeepsScopeTag) {
  auto el = ELSet::empty_for(testing_support::ash_instance(), Provenance::Filtered);
  el.scope = StanceScope::OpposeOnly;
  el.options[1].oppose = {"no"};
  const auto j = el_set_to_json(el);
  EXPECT_EQ(j.at("provenance"), "Filtered-opp");
  const auto back = el_set_from_json(j);
  EXPECT_EQ(el_set_to_json(back), j);
}

TEST(ExtractionProperty, MockPipelineIsBitStable) {
  const auto inst = testing_support::ash_instance();
  const auto cot = testing_support::read_file(testing_support::source_path("tests/fixtures/siqa_ash_cot.txt"));
  const json rules = json::array(
      {{{"match", {{"system_contains", "JSON"}}},
        {"response", {{"text", R"({"Option A": {"supporting": ["relief"], "opposing": []}})"}}}},
       {{"match", {{"contains", "extract and list"}}}, {"response", {{"text", "Option A: relief"}}}},
       reply(cot)});
  std::string first;
  for (int i = 0; i < 2; ++i) {
    auto gw = gateway_for(rules);
    const auto rec = generate_cot(gw, inst, {});
    const auto parsed = parse_cot(gw, rec, {});
    const auto el = structure_el(gw, parsed, inst, {}).el;
    const auto dump = cot_record_to_json(rec).dump() + parsed + el_set_to_json(el).dump();
    if (i == 0) first = dump;
    else EXPECT_EQ(dump, first);
  }
}
