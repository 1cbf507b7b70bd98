// Offline acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "../test_support.hpp"
#include "cot2el/core/gold.hpp"
#include "cot2el/gateway/mock_provider.hpp"
#include "cot2el/judge/judge.hpp"
#include "cot2el/metrics/metrics.hpp"
#include "cot2el/pipeline/pipeline.hpp"
#include "cot2el/refine/align.hpp"
#include "cot2el/validate/score.hpp"

using namespace cot2el;
using testing_support::read_file;
using testing_support::source_path;
using testing_support::TempDir;
using V = std::vector<double>;

namespace {

/// Collects the first few mismatches of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 3) detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": got " << got << " want " << want;
    expect(std::fabs(got - want) <= tol, os.str());
  }
  bool ok() const { return failures_ == 0; }
  std::string detail() const { return detail_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : ""); }

 private:
  int failures_ = 0;
  std::string detail_;
};

std::string show(const V& v) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str() + "]";
}

double brute_tau_a(const V& a, const V& b) {
  long c = 0, d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double p = (a[i] - a[j]) * (b[i] - b[j]);
      c += p > 0;
      d += p < 0;
    }
  const double n = static_cast<double>(a.size());
  return static_cast<double>(c - d) / (n * (n - 1) / 2.0);
}

double pearson(const V& a, const V& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i] / n, mb += b[i] / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Average ranks over a small set of levels, so ties are frequent.
V tied_ranking(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> level(0, static_cast<int>(n) / 2 + 1);
  V v(n);
  for (auto& x : v) x = level(rng);
  return rank_descending(v).ranks();
}

bool constant(const V& v) { return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end(); }

Check metric_oracles() {
  Check c;
  for (std::size_t n = 2; n <= 5; ++n) {
    V p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(i + 1);
    std::vector<V> perms;
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    for (const auto& a : perms)
      for (const auto& b : perms) {
        const double got = kendall_tau(a, b, KendallVariant::TauA);
        c.expect(got == brute_tau_a(a, b), "tau-a " + show(a) + " vs " + show(b));
      }
  }
  std::mt19937_64 rng(101);
  for (int done = 0; done < 1000;) {
    const std::size_t n = 3 + static_cast<std::size_t>(done % 5);
    const auto a = tied_ranking(rng, n);
    const auto b = tied_ranking(rng, n);
    if (constant(a) || constant(b)) continue;
    c.near(spearman_rho(a, b), pearson(a, b), 1e-12, "rho " + show(a) + " vs " + show(b));
    ++done;
  }
  return c;
}

V smoothed(std::mt19937_64& rng, std::size_t n) {
  auto v = testing_support::random_distribution(rng, n, true);
  double s = 0;
  for (auto& x : v) s += (x += kSmoothingEpsilon);
  for (auto& x : v) x /= s;
  return v;
}

Check distribution_properties() {
  Check c;
  std::mt19937_64 rng(102);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = t % 2 ? 5 : 3;
    const auto p = smoothed(rng, n), q = smoothed(rng, n), r = smoothed(rng, n);
    c.expect(kl_divergence(p, q) >= -1e-12, "KL negative");
    c.expect(kl_divergence(p, p) <= 1e-12, "KL(p,p) > 0");
    const double j = js_distance(p, q);
    c.near(j, js_distance(q, p), 1e-12, "JSD symmetry");
    c.expect(j >= 0.0 && j <= 1.0, "JSD out of [0,1]");
    c.near(total_variation(p, q), total_variation(q, p), 1e-12, "TVD symmetry");
    c.expect(total_variation(p, r) <= total_variation(p, q) + total_variation(q, r) + 1e-12, "TVD triangle");
  }
  c.near(js_distance(V{1, 0}, V{0, 1}), 1.0, 1e-9, "JSD([1,0],[0,1])");
  return c;
}

struct Block {
  std::size_t i, j, k;
};

/// Longest matching block by exhaustive search, earliest in a then in b.
Block longest(const std::u32string& a, std::size_t alo, std::size_t ahi, const std::u32string& b, std::size_t blo,
              std::size_t bhi) {
  Block best{alo, blo, 0};
  for (std::size_t i = alo; i < ahi; ++i)
    for (std::size_t j = blo; j < bhi; ++j) {
      std::size_t k = 0;
      while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
      if (k > best.k) best = {i, j, k};
    }
  return best;
}

std::size_t matches(const std::u32string& a, std::size_t alo, std::size_t ahi, const std::u32string& b, std::size_t blo,
                    std::size_t bhi) {
  const Block m = longest(a, alo, ahi, b, blo, bhi);
  if (m.k == 0) return 0;
  return m.k + matches(a, alo, m.i, b, blo, m.j) + matches(a, m.i + m.k, ahi, b, m.j + m.k, bhi);
}

double brute_ratio(const std::string& a, const std::string& b) {
  const auto ua = text::utf8_decode(text::collapse_whitespace(a));
  const auto ub = text::utf8_decode(text::collapse_whitespace(b));
  if (ua.empty() && ub.empty()) return 1.0;
  return 2.0 * static_cast<double>(matches(ua, 0, ua.size(), ub, 0, ub.size())) /
         static_cast<double>(ua.size() + ub.size());
}

Check similarity_ratio_oracle() {
  Check c;
  c.expect(similarity_ratio("abcd", "bcde") == 0.75, "ratio(abcd, bcde) != 0.75");
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> len(0, 30);
  for (int t = 0; t < 500; ++t) {
    const std::string alphabet = t % 2 ? "ab" : "abcde ";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string a, b;
    for (std::size_t n = len(rng); n > 0; --n) a += alphabet[pick(rng)];
    for (std::size_t n = len(rng); n > 0; --n) b += alphabet[pick(rng)];
    c.expect(similarity_ratio(a, b) == brute_ratio(a, b), "ratio '" + a + "' '" + b + "'");
  }
  return c;
}

RunConfig demo_config(const std::string& name, const fs::path& work) {
  auto cfg = load_run_config(source_path("data/" + name + ".json"));
  cfg.mock_dir = source_path("data/mock/" + name);
  cfg.artifacts_dir = work / "artifacts";
  cfg.cache_dir = work / "cache";
  return cfg;
}

json load(const fs::path& p) { return json::parse(read_file(p)); }

Check unit_closure() {
  Check c;
  TempDir work;
  Pipeline p(demo_config("siqa_demo", work.path()));
  p.run();
  const std::string id = "siqa-ash";
  const auto rec = cot_record_from_json(load(p.artifact(Stage::CoT, id)));
  const auto& cot = rec.raw_cot;
  c.expect(cot == text::trim(read_file(source_path("tests/fixtures/siqa_ash_cot.txt"))), "trace differs from the fixture");

  const json seg = load(p.artifact(Stage::Segment, id));
  const auto units = unit_set_from_json(seg);
  std::string rebuilt;
  std::size_t pos = 0;
  for (const auto& e : seg.at("edus")) {
    const auto s = segment_from_json(e);
    c.expect(pos <= s.start && s.end <= cot.size(), "EDU spans overlap or overrun");
    if (pos > s.start || s.end > cot.size()) break;
    const auto gap = cot.substr(pos, s.start - pos);
    c.expect(text::trim_view(gap).empty(), "non-space gap '" + gap + "'");
    c.expect(cot.substr(s.start, s.end - s.start) == s.text, "EDU text differs from its span");
    rebuilt += gap + s.text;
    pos = s.end;
  }
  rebuilt += cot.substr(std::min(pos, cot.size()));
  c.expect(rebuilt == cot, "EDU concatenation does not reproduce the trace");

  const auto el = el_set_from_json(load(p.artifact(Stage::Refine, id)).at("el"));
  std::size_t n = 0;
  for (const auto& o : el.options)
    for (auto stance : {Stance::Support, Stance::Oppose})
      for (const auto& e : o.list(stance)) {
        ++n;
        c.expect(units.contains_text(e), "not a unit: " + e);
      }
  c.expect(n > 0, "Filtered EL set is empty");
  return c;
}

ELSet two_label(const std::vector<std::string>& as, const std::vector<std::string>& ao,
                const std::vector<std::string>& bs, const std::vector<std::string>& bo) {
  ELSet el;
  el.instance_id = "two";
  el.options = {{'A', as, ao}, {'B', bs, bo}};
  return el;
}

Check cell_aggregation() {
  Check c;
  CoarseTagger tagger;
  HashingEmbedder embedder;
  ScoringContext ctx{tagger, embedder};
  // Cells: A-support both empty, A-oppose human empty, B-support machine empty, B-oppose identical.
  const auto machine = two_label({}, {"the test was hard"}, {}, {"Ash felt relief after passing"});
  const auto human = two_label({}, {}, {"Ash is proud"}, {"Ash felt relief after passing"});
  c.expect(stance_pair_score({}, {}, ctx) == 1.0, "both-empty cell != 1");
  c.expect(stance_pair_score({"x"}, {}, ctx) == 0.0, "human-empty cell != 0");
  c.expect(stance_pair_score({}, {"y"}, ctx) == 0.0, "machine-empty cell != 0");
  c.expect(stance_pair_score({"Ash felt relief"}, {"Ash felt relief"}, ctx) == 1.0, "identical cell != 1");
  const auto res = instance_score(machine, human, ctx);
  c.expect(res.cells.size() == 4u, "expected 2k = 4 cells");
  if (res.cells.size() == 4u) {
    const V want{1, 0, 0, 1};
    for (std::size_t i = 0; i < 4; ++i) c.expect(res.cells[i].row[kAvg4] == want[i], "cell " + std::to_string(i));
  }
  c.expect(res.score() == 0.5, "instance score != (1+0+0+1)/4");
  return c;
}

json run_rule(int run, const std::string& reply) {
  return {{"match", {{"run_index", run}}}, {"response", {{"text", reply}}}};
}

Check judge_parsing() {
  Check c;
  const auto bac = parse_direct_rank("B A C", 3);
  c.expect(bac && bac->ranks() == V{2, 1, 3}, "'B A C' != (2,1,3)");
  const auto b = parse_direct_rank("B", 3);
  c.expect(b && b->ranks() == V{2.5, 1, 2.5}, "'B' != (2.5,1,2.5)");
  Gateway gw(std::make_shared<MockProvider>(
                 json::array({run_rule(0, "A B C"), run_rule(1, "A B C"), run_rule(2, "B A C")})),
             nullptr, RetryPolicy{1, std::chrono::milliseconds(0), 1.0});
  const auto out = judge_direct_rank(gw, testing_support::ash_instance(), {}, {"judge", 0.0, 16});
  c.expect(out.runs.size() == 3u, "expected three runs");
  c.expect(out.ranking.ranks() == V{1, 2, 3}, "aggregate " + show(out.ranking.ranks()) + " != (1,2,3)");
  return c;
}

Check score_spot_checks() {
  Check c;
  const V pred{3, 3, 3}, gold{1, 2, 3};
  c.expect(mae(pred, gold) == 1.0, "MAE != 1");
  c.near(rmse(pred, gold), std::sqrt(5.0 / 3.0), 1e-12, "RMSE");
  c.near(r_squared(pred, gold), -1.5, 1e-12, "R2");
  return c;
}

Check end_to_end_determinism() {
  Check c;
  for (const std::string name : {"siqa_demo", "nli_demo"}) {
    TempDir a, b;
    Pipeline pa(demo_config(name, a.path()));
    Pipeline pb(demo_config(name, b.path()));
    std::size_t failed = 0;
    for (const auto& r : pa.run()) failed += r.failed;
    for (const auto& r : pb.run()) failed += r.failed;
    c.expect(pa.instances().size() == 3u, name + " is not a 3-instance set");
    c.expect(failed == 0, name + ": failed instances");
    for (const std::string suffix : {".csv", "_long.csv"}) {
      const auto fa = read_file(pa.report_path(suffix));
      c.expect(!fa.empty(), name + suffix + " empty");
      c.expect(fa == read_file(pb.report_path(suffix)), name + suffix + " differs between runs");
      c.expect(fa == read_file(source_path("tests/golden/" + name + suffix)), name + suffix + " differs from golden");
    }
  }
  return c;
}

Check gold_aggregation() {
  Check c;
  auto nli = testing_support::nli_instance();
  nli.gold.distribution_sources = {{"a", {0.6, 0.4, 0}}, {"b", {0.2, 0.2, 0.6}}, {"c", {0.4, 0.4, 0.2}}};
  const auto d = aggregate_gold_distribution(nli);
  c.near(d[0], 0.4, 1e-12, "mean[0]");
  c.near(d[1], 1.0 / 3.0, 1e-12, "mean[1]");
  c.near(d[2], 4.0 / 15.0, 1e-12, "mean[2]");
  auto mcqa = testing_support::ash_instance();
  mcqa.gold.likert = {{5, 5, 5, 5, 5}, {1, 2, 3, 4, 5}, {4, 4, 5}};
  auto s = aggregate_gold_scores(mcqa);
  c.expect(s[0] == 5.0 && s[1] == 3.0 && s[2] == 13.0 / 3.0, "Likert means of [5x5], [1..5], [4,4,5]");
  mcqa.gold.likert = {{4, 4, 5}, {1, 2, 1}, {3}};
  s = aggregate_gold_scores(mcqa);
  c.expect(s[0] == 13.0 / 3.0 && s[1] == 4.0 / 3.0, "Likert means of [4,4,5], [1,2,1]");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check()>>> criteria = {
      {"metric oracle equivalence", metric_oracles},
      {"distribution metric properties", distribution_properties},
      {"similarity ratio", similarity_ratio_oracle},
      {"filtered explanations are units", unit_closure},
      {"validation cell aggregation", cell_aggregation},
      {"judge parsing rules", judge_parsing},
      {"score metric spot checks", score_spot_checks},
      {"end-to-end determinism", end_to_end_determinism},
      {"gold aggregation", gold_aggregation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, run] = criteria[i];
    std::string detail;
    bool ok = false;
    try {
      const Check c = run();
      ok = c.ok();
      detail = c.detail();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    failed += !ok;
    std::printf("%s %zu %s%s%s\n", ok ? "PASS" : "FAIL", i + 1, name, detail.empty() ? "" : ": ", detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}
