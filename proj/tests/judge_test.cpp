#include <gtest/gtest.h>

#include <cmath>

#include "cot2el/gateway/mock_provider.hpp"
#include "cot2el/judge/judge.hpp"
#include "cot2el/refine/align.hpp"
#include "test_support.hpp"

using namespace cot2el;
using V = std::vector<double>;

namespace {

Gateway mock_gateway(const json& rules) {
  return Gateway(std::make_shared<MockProvider>(rules), nullptr, RetryPolicy{1, std::chrono::milliseconds(0), 1.0});
}

json run_rule(int run, const std::string& text) {
  return {{"match", {{"run_index", run}}}, {"response", {{"text", text}}}};
}

json logits_rule(int run, const json& logits) {
  return {{"match", {{"run_index", run}, {"logits", true}}}, {"response", {{"text", "A"}, {"first_token_logits", logits}}}};
}

JudgeConfig config() { return {"judge", 0.0, 16}; }

/// Fixtures keyed on option text, so the same preferences apply under any option order.
json preference_rules(const Instance& inst, const std::map<std::string, double>& pref) {
  json rules = json::array();
  std::vector<std::pair<double, char>> order;
  json logits = json::object();
  for (const auto& o : inst.options) {
    order.push_back({pref.at(o.text), o.letter});
    logits[std::string(1, o.letter)] = pref.at(o.text);
    rules.push_back({{"match", {{"contains", "Answer: " + o.text + "\n"}}},
                     {"response", {{"text", std::to_string(static_cast<int>(pref.at(o.text)))}}}});
  }
  std::sort(order.begin(), order.end(), std::greater<>());
  std::string ranked;
  for (const auto& [_, l] : order) ranked += std::string(ranked.empty() ? "" : " ") + l;
  rules.push_back({{"match", {{"logits", true}}}, {"response", {{"text", ranked}, {"first_token_logits", logits}}}});
  rules.push_back({{"match", json::object()}, {"response", {{"text", ranked}}}});
  return rules;
}

}  // namespace

TEST(DirectRank, ParsingRules) {
  EXPECT_EQ(parse_direct_rank("B A C", 3)->ranks(), (V{2, 1, 3}));
  EXPECT_EQ(parse_direct_rank("B", 3)->ranks(), (V{2.5, 1, 2.5}));
  EXPECT_EQ(parse_direct_rank("B B A", 3)->ranks(), (V{2, 1, 3}));
  EXPECT_EQ(parse_direct_rank("\nC, A\nB", 3)->ranks(), (V{2, 3, 1}));  // first non-empty line only
  EXPECT_EQ(parse_direct_rank("E D", 5)->ranks(), (V{4, 4, 4, 2, 1}));
  EXPECT_EQ(parse_direct_rank("A D", 3)->ranks(), (V{1, 2.5, 2.5}));
  EXPECT_FALSE(parse_direct_rank("Accomplished", 3));
  EXPECT_FALSE(parse_direct_rank("", 3));
}

TEST(DirectRank, EveryOptionGetsOneRankOnRandomReplies) {
  std::mt19937_64 rng(61);
  const std::string alphabet = "ABCDE xyz,.\n";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::string reply;
    for (int n = 0; n < 12; ++n) reply += alphabet[pick(rng)];
    const std::size_t n = trial % 2 ? 5 : 3;
    const auto r = parse_direct_rank(reply, n);
    if (!r) continue;
    ASSERT_EQ(r->size(), n);
    double sum = 0;
    for (double x : r->ranks()) sum += x;
    EXPECT_NEAR(sum, n * (n + 1) / 2.0, 1e-9);
  }
}

TEST(DirectRank, ThreeRunAggregation) {
  const auto agg = aggregate_rankings({Ranking({1, 2, 3}), Ranking({1, 2, 3}), Ranking({2, 1, 3})});
  EXPECT_EQ(agg.ranks(), (V{1, 2, 3}));
  auto gw = mock_gateway(json::array({run_rule(0, "A B C"), run_rule(1, "A B C"), run_rule(2, "B A C")}));
  const auto out = judge_direct_rank(gw, testing_support::ash_instance(), {}, config());
  EXPECT_EQ(out.ranking.ranks(), (V{1, 2, 3}));
  ASSERT_EQ(out.runs.size(), 3u);
  EXPECT_EQ(out.runs[2].parsed, json(V{2, 1, 3}));
}

TEST(DirectRank, InvalidRunsAreSkippedAndAllInvalidIsAnError) {
  auto gw = mock_gateway(json::array({run_rule(0, "no idea"), run_rule(1, "C B A"), run_rule(2, "???")}));
  const auto out = judge_direct_rank(gw, testing_support::ash_instance(), {}, config());
  EXPECT_EQ(out.ranking.ranks(), (V{3, 2, 1}));
  EXPECT_FALSE(out.runs[0].valid);
  EXPECT_EQ(out.warnings.size(), 2u);
  auto bad = mock_gateway(json::array({{{"match", json::object()}, {"response", {{"text", "none"}}}}}));
  try {
    judge_direct_rank(bad, testing_support::ash_instance(), {}, config());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("all direct-rank runs invalid"), std::string::npos);
  }
}

TEST(Logits, SoftmaxOverOptionLetters) {
  const auto u = logits_to_distribution({{"A", 0}, {"B", 0}, {"C", 0}}, 3);
  for (double x : u->values()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  const auto d = logits_to_distribution({{"A", std::log(2.0)}, {"B", 0}, {"C", 0}}, 3);
  EXPECT_NEAR((*d)[0], 0.5, 1e-15);
  EXPECT_NEAR((*d)[1], 0.25, 1e-15);
  EXPECT_NEAR((*d)[2], 0.25, 1e-15);
}

TEST(Logits, LeadingSpaceVariantsMissingLettersAndNoise) {
  const auto d = logits_to_distribution({{" A", 1.0}, {"A", -5.0}, {"B", 1.0}, {"The", 9.0}, {"D", 9.0}}, 3);
  ASSERT_TRUE(d);
  EXPECT_NEAR((*d)[0], 0.5, 1e-15);
  EXPECT_NEAR((*d)[1], 0.5, 1e-15);
  EXPECT_EQ((*d)[2], 0.0);
  EXPECT_FALSE(logits_to_distribution({{"The", 1.0}, {"a", 1.0}}, 3));
}

TEST(Logits, RunAggregation) {
  const auto agg = aggregate_distributions({Distribution({1, 0, 0}), Distribution({0, 1, 0}), Distribution({0.5, 0.5, 0})});
  EXPECT_NEAR(agg[0], 0.5, 1e-15);
  EXPECT_NEAR(agg[1], 0.5, 1e-15);
  EXPECT_EQ(agg[2], 0.0);
  const double big = 60.0;
  auto gw = mock_gateway(json::array({logits_rule(0, {{"A", big}, {"B", 0}, {"C", 0}}),
                                      logits_rule(1, {{"A", 0}, {"B", big}, {"C", 0}}),
                                      logits_rule(2, {{"A", big}, {"B", big}, {"C", 0}})}));
  const auto out = judge_logits(gw, testing_support::ash_instance(), {}, config());
  ASSERT_TRUE(out.distribution);
  EXPECT_NEAR((*out.distribution)[0], 0.5, 1e-12);
  EXPECT_NEAR((*out.distribution)[1], 0.5, 1e-12);
  EXPECT_EQ(out.ranking.ranks(), (V{1.5, 1.5, 3}));
  double sum = 0;
  for (double x : out.distribution->values()) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Logits, MissingLogitsMakeTheRunInvalid) {
  auto gw = mock_gateway(json::array({{{"match", json::object()}, {"response", {{"text", "A"}}}}}));
  EXPECT_THROW(judge_logits(gw, testing_support::ash_instance(), {}, config()), ValidationError);
}

TEST(Score, ParsingRules) {
  EXPECT_EQ(parse_score_reply("4"), 4);
  EXPECT_EQ(parse_score_reply("Rating: 5 because it fits"), 5);
  EXPECT_EQ(parse_score_reply("10 out of 10, so 3"), 3);
  EXPECT_EQ(parse_score_reply("0"), std::nullopt);
  EXPECT_EQ(parse_score_reply("high"), std::nullopt);
}

TEST(Score, RunMeansAndInvalidCells) {
  const auto s = aggregate_scores({{4, 2}, {5, std::nullopt}, {3, 2}}, 2);
  EXPECT_EQ(s[0], 4.0);
  EXPECT_EQ(s[1], 2.0);
  EXPECT_THROW(aggregate_scores({{4, std::nullopt}, {5, std::nullopt}}, 2, "x"), ValidationError);
}

TEST(Score, JudgeCallsOncePerOptionAndRun) {
  const auto inst = testing_support::ash_instance();
  auto gw = mock_gateway(json::array({
      {{"match", {{"contains", "Answer: relieved\n"}, {"run_index", 0}}}, {"response", {{"text", "4"}}}},
      {{"match", {{"contains", "Answer: relieved\n"}, {"run_index", 1}}}, {"response", {{"text", "5"}}}},
      {{"match", {{"contains", "Answer: relieved\n"}, {"run_index", 2}}}, {"response", {{"text", "3"}}}},
      {{"match", {{"contains", "Answer: accomplished\n"}}}, {"response", {{"text", "Rating: 5"}}}},
      {{"match", {{"contains", "Answer: proud\n"}}}, {"response", {{"text", "2"}}}},
  }));
  const auto out = judge_score(gw, inst, {}, config());
  EXPECT_EQ(out.scores->values(), (V{4, 5, 2}));
  EXPECT_EQ(out.ranking.ranks(), (V{2, 1, 3}));
  EXPECT_EQ(gw.stats().provider_calls.load(), 9u);
}

TEST(Injection, ExplanationsBlock) {
  const auto inst = testing_support::ash_instance();
  auto el = ELSet::empty_for(inst, Provenance::Filtered);
  el.options[0].support = {"Passing the test might take away that anxiety."};
  el.options[0].oppose = {"It's a bit similar to accomplished"};
  std::vector<std::string> warnings;
  const auto prompt = inject_el(PromptKind::DirectRank, inst, el, &warnings);
  EXPECT_NE(prompt.find("Explanations: Option A (relieved): support: [Passing the test might take away that anxiety.]"),
            std::string::npos);
  EXPECT_TRUE(warnings.empty());

  const auto sup = inject_el(PromptKind::DirectRank, inst, stance_subset(el, Stance::Support), &warnings);
  EXPECT_EQ(sup.find("oppose:"), std::string::npos);

  const auto empty = inject_el(PromptKind::DirectRank, inst, ELSet::empty_for(inst, Provenance::Filtered), &warnings);
  EXPECT_NE(empty.find("Explanations: \n"), std::string::npos);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("empty EL set injected"), std::string::npos);
}

TEST(JudgeOutputsJson, RoundTrip) {
  auto gw = mock_gateway(json::array({logits_rule(0, {{"A", 1.0}}), logits_rule(1, {{"B", 1.0}}), logits_rule(2, {{"C", 2.0}})}));
  const auto out = judge_logits(gw, testing_support::ash_instance(), {}, config());
  const auto j = judge_outputs_to_json(out);
  EXPECT_EQ(judge_outputs_to_json(judge_outputs_from_json(j)), j);
}

TEST(JudgeProperty, PermutingOptionsPermutesOutputs) {
  const auto inst = testing_support::ash_instance();
  const std::map<std::string, double> pref = {{"relieved", 4}, {"accomplished", 5}, {"proud", 2}};
  const std::vector<std::vector<std::size_t>> perms = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::map<JudgeMethod, JudgeOutputs> base;
  for (auto m : {JudgeMethod::RankRank, JudgeMethod::RankLogits, JudgeMethod::RankScore}) {
    auto gw = mock_gateway(preference_rules(inst, pref));
    base.emplace(m, run_judge(m, gw, inst, {}, config()));
  }
  for (const auto& perm : perms) {
    Instance p = inst;
    for (std::size_t i = 0; i < 3; ++i) p.options[i].text = inst.options[perm[i]].text;
    for (auto m : {JudgeMethod::RankRank, JudgeMethod::RankLogits, JudgeMethod::RankScore}) {
      auto gw = mock_gateway(preference_rules(p, pref));
      const auto out = run_judge(m, gw, p, {}, config());
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(out.ranking[i], base.at(m).ranking[perm[i]]);
        if (out.distribution) {
          EXPECT_NEAR((*out.distribution)[i], (*base.at(m).distribution)[perm[i]], 1e-15);
        }
        if (out.scores) {
          EXPECT_EQ((*out.scores)[i], (*base.at(m).scores)[perm[i]]);
        }
      }
    }
  }
}
