#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cot2el/validate/score.hpp"
#include "test_support.hpp"

using namespace cot2el;
using Strings = std::vector<std::string>;

namespace {

ELSet two_label(const Strings& as, const Strings& ao, const Strings& bs, const Strings& bo) {
  ELSet el;
  el.instance_id = "two";
  el.options = {{'A', as, ao}, {'B', bs, bo}};
  return el;
}

/// Edit distance by full-table recursion over code points.
std::size_t dp_levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

std::string random_sentence(std::mt19937_64& rng) {
  static const Strings words = {"the", "Ash", "test", "passed", "relief", "proud", "was", "quickly", "a",
                                "feeling", "of", "and", "because", "happiness", "it", "runs", ","};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> len(1, 9);
  std::string s;
  for (int n = len(rng); n > 0; --n) s += (s.empty() ? "" : " ") + words[pick(rng)];
  return s;
}

struct Offline {
  CoarseTagger tagger;
  HashingEmbedder embedder;
  ScoringContext ctx{tagger, embedder};
};

}  // namespace

TEST(Lexical, WorkedExamples) {
  EXPECT_EQ(lexical_similarity("a b c", "a b c", 1), 1.0);
  EXPECT_EQ(lexical_similarity("a b c", "a b d", 1), 0.5);
  EXPECT_EQ(lexical_similarity("a", "b c", 2), 0.0);
  EXPECT_EQ(lexical_similarity("a", "b", 2), 1.0);  // both bigram sets empty
  EXPECT_EQ(lexical_similarity("The Cat", "the cat", 1), 1.0);
  EXPECT_EQ(lexical_similarity("a b c d", "b c d e", 3), 1.0 / 3.0);
  EXPECT_THROW(lexical_similarity("a", "a", 4), ValidationError);
}

TEST(Syntactic, CoarseTags) {
  CoarseTagger t;
  EXPECT_EQ(t.tag("the cat runs"), (Strings{"DET", "NOUN", "VERB"}));
  EXPECT_EQ(t.tag("a dog runs"), (Strings{"DET", "NOUN", "VERB"}));
  EXPECT_EQ(syntactic_similarity("the cat runs", "a dog runs", 1, t), 1.0);
  EXPECT_EQ(syntactic_similarity("the cat runs", "the cat runs", 3, t), 1.0);
  EXPECT_EQ(syntactic_similarity("", "the cat runs", 1, t), 0.0);
  EXPECT_EQ(t.tag("They quickly passed the exam."), (Strings{"PRON", "ADV", "VERB", "DET", "NOUN", "PUNCT"}));
}

TEST(Syntactic, ExternalTaggerFailureIsAnError) {
  ExternalTagger t(std::make_unique<SubprocessJsonClient>(std::string(COT2EL_FAKE_ADAPTER) + " crash"));
  EXPECT_THROW(syntactic_similarity("a", "b", 1, t), AdapterError);
}

TEST(Semantic, WorkedExamples) {
  MockEmbedder mock({{"x", {1, 0}}, {"y", {0, 1}}, {"z", {-1, 0}}});
  const auto same = semantic_similarity("anything", "anything", mock);
  EXPECT_EQ(same.cos, 1.0);
  EXPECT_EQ(same.euc, 1.0);
  const auto orth = semantic_similarity("x", "y", mock);
  EXPECT_EQ(orth.cos, 0.0);
  EXPECT_NEAR(orth.euc, 1.0 / (1.0 + std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(orth.euc, 0.4142, 1e-4);
  EXPECT_EQ(semantic_similarity("x", "z", mock).cos, 0.0);  // clamped
  EXPECT_THROW(semantic_similarity("x", "unknown", mock), AdapterError);
}

TEST(Semantic, ExternalEmbedderUsesTheAdapterVectors) {
  ExternalEmbedder e(std::make_unique<SubprocessJsonClient>(std::string(COT2EL_FAKE_ADAPTER) + " embed"));
  const auto s = semantic_similarity("ab", "ba", e);  // equal letter counts
  EXPECT_NEAR(s.cos, 1.0, 1e-15);
  EXPECT_EQ(s.euc, 1.0);
  EXPECT_EQ(semantic_similarity("a", "b", e).cos, 0.0);
}

TEST(Levenshtein, WorkedExamples) {
  EXPECT_EQ(levenshtein_ratio("x", "x"), 1.0);
  EXPECT_EQ(levenshtein_distance(U"kitten", U"sitting"), 3u);
  EXPECT_NEAR(levenshtein_ratio("kitten", "sitting"), 1.0 - 3.0 / 7.0, 1e-15);
  EXPECT_EQ(levenshtein_ratio("", "abc"), 0.0);
  EXPECT_EQ(levenshtein_ratio("", ""), 1.0);
  EXPECT_EQ(levenshtein_ratio("caf\xC3\xA9", "cafe"), 0.75);
}

TEST(Levenshtein, MatchesFullTableOnRandomPairs) {
  std::mt19937_64 rng(51);
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> ch(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string a, b;
    for (int n = len(rng); n > 0; --n) a += static_cast<char32_t>('a' + ch(rng));
    for (int n = len(rng); n > 0; --n) b += static_cast<char32_t>('a' + ch(rng));
    EXPECT_EQ(levenshtein_distance(a, b), dp_levenshtein(a, b));
  }
}

TEST(StancePair, WorkedExamples) {
  Offline o;
  EXPECT_EQ(stance_pair_score({}, {}, o.ctx), 1.0);
  EXPECT_EQ(stance_pair_score({"x"}, {}, o.ctx), 0.0);
  EXPECT_EQ(stance_pair_score({}, {"x"}, o.ctx), 0.0);
  EXPECT_EQ(stance_pair_score({"a b"}, {"a b", "z"}, o.ctx), 1.0);
}

TEST(StancePair, MeanOfPerExplanationMaxima) {
  Offline o;
  const std::string h1 = "Ash feels relieved after passing";
  const std::string h2 = "the pride comes from effort";
  const std::string m1 = "Ash is relieved";
  const std::string m2 = "pride from effort";
  auto avg4 = [&](const std::string& a, const std::string& b) { return similarity_breakdown(a, b, o.ctx).avg4; };
  const double expected = (std::max(avg4(m1, h1), avg4(m1, h2)) + std::max(avg4(m2, h1), avg4(m2, h2))) / 2.0;
  EXPECT_EQ(stance_pair_score({m1, m2}, {h1, h2}, o.ctx), expected);
}

TEST(Breakdown, Avg4UsesCosineNotEuclidean) {
  Offline o;
  const auto s = similarity_breakdown("the cat runs", "a dog sleeps", o.ctx);
  EXPECT_EQ(s.avg4, (s.lexical_mean() + s.syntactic_mean() + s.semantic_cos + s.lev_ratio) / 4.0);
  const auto row = to_row(s, ValidationWeights{});
  EXPECT_EQ(row[kAvg4], s.avg4);
  EXPECT_NEAR(row[kWeightAvg], (s.lexical_mean() + s.syntactic_mean() + s.semantic_cos + s.semantic_euc + s.lev_ratio) / 5.0,
              1e-15);
  ValidationWeights lev_only{0, 0, 0, 0, 1};
  EXPECT_EQ(to_row(s, lev_only)[kWeightAvg], s.lev_ratio);
  EXPECT_THROW(to_row(s, ValidationWeights{0, 0, 0, 0, 0}), ValidationError);
}

TEST(InstanceScore, TwoLabelCellCombinations) {
  Offline o;
  // A-support: both empty; A-oppose: human empty; B-support: machine empty; B-oppose: identical.
  const auto machine = two_label({}, {"x"}, {}, {"a b"});
  const auto human = two_label({}, {}, {"y"}, {"a b"});
  const auto res = instance_score(machine, human, o.ctx);
  ASSERT_EQ(res.cells.size(), 4u);
  EXPECT_EQ(res.cells[0].row[kAvg4], 1.0);
  EXPECT_EQ(res.cells[1].row[kAvg4], 0.0);
  EXPECT_EQ(res.cells[2].row[kAvg4], 0.0);
  EXPECT_EQ(res.cells[3].row[kAvg4], 1.0);
  EXPECT_EQ(res.score(), 0.5);
}

TEST(InstanceScore, IdentityAndOneMissingCell) {
  Offline o;
  const auto full = two_label({"s1 here"}, {"o1 there"}, {"s2 again"}, {"o2 too"});
  EXPECT_EQ(instance_score(full, full, o.ctx).score(), 1.0);
  const auto empty = two_label({}, {}, {}, {});
  EXPECT_EQ(instance_score(empty, empty, o.ctx).score(), 1.0);
  const auto one = two_label({}, {}, {"only"}, {});
  EXPECT_EQ(instance_score(empty, one, o.ctx).score(), 3.0 / 4.0);
}

TEST(InstanceScore, ThreeLabelsGiveSixCells) {
  Offline o;
  auto el = ELSet::empty_for(testing_support::ash_instance(), Provenance::Filtered);
  auto human = ELSet::empty_for(testing_support::ash_instance(), Provenance::Human);
  human.options[2].oppose = {"pride is too strong"};
  const auto res = instance_score(el, human, o.ctx);
  EXPECT_EQ(res.cells.size(), 6u);
  EXPECT_EQ(res.score(), 5.0 / 6.0);
}

TEST(InstanceScore, OptionMismatchIsAnError) {
  Offline o;
  auto other = two_label({}, {}, {}, {});
  other.options[1].letter = 'C';
  EXPECT_THROW(instance_score(two_label({}, {}, {}, {}), other, o.ctx), ValidationError);
  EXPECT_THROW(instance_score(two_label({}, {}, {}, {}), ELSet::empty_for(testing_support::ash_instance(), Provenance::Human), o.ctx),
               ValidationError);
}

TEST(Corpus, MeanOfInstanceScores) {
  Offline o;
  const auto a = two_label({}, {"x"}, {}, {"a b"});
  const auto b = two_label({}, {}, {"y"}, {"a b"});
  const auto rep = validate_corpus({{a, b}, {a, a}}, o.ctx);
  ASSERT_EQ(rep.instances.size(), 2u);
  EXPECT_EQ(rep.score(), (0.5 + 1.0) / 2.0);
  const auto j = validation_report_to_json(rep);
  EXPECT_EQ(j.at("instances")[0].at("instance_score"), 0.5);
  EXPECT_EQ(j.at("instances")[0].at("cells").size(), 4u);
  EXPECT_TRUE(j.at("corpus").contains("weight_avg"));
}

TEST(ValidateProperty, RangeIdentityAndMonotonicity) {
  Offline o;
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_sentence(rng);
    const auto b = random_sentence(rng);
    const auto row = to_row(similarity_breakdown(a, b, o.ctx), ValidationWeights{});
    for (double v : row) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-15);
    }
    const auto self = to_row(similarity_breakdown(a, a, o.ctx), ValidationWeights{});
    for (double v : self) EXPECT_NEAR(v, 1.0, 1e-15);

    Strings machine = {random_sentence(rng), random_sentence(rng)};
    Strings human = {random_sentence(rng)};
    const auto before = stance_pair_row(machine, human, o.ctx);
    human.push_back(random_sentence(rng));
    const auto after = stance_pair_row(machine, human, o.ctx);
    for (std::size_t c = 0; c < kColumnCount; ++c) EXPECT_GE(after[c], before[c]);
  }
}
