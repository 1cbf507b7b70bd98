#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/dataset.hpp"
#include "cot2el/discourse/segment.hpp"
#include "cot2el/extract/extract.hpp"
#include "cot2el/gateway/gateway.hpp"
#include "cot2el/gateway/mock_provider.hpp"
#include "cot2el/gateway/openai_provider.hpp"
#include "cot2el/judge/judge.hpp"
#include "cot2el/pipeline/config.hpp"
#include "cot2el/pipeline/manifest.hpp"
#include "cot2el/pipeline/report.hpp"
#include "cot2el/refine/align.hpp"
#include "cot2el/util/hash.hpp"
#include "cot2el/util/line_client.hpp"
#include "cot2el/validate/measures.hpp"
#include "cot2el/validate/score.hpp"

namespace cot2el {

/// A stage cannot find an upstream artifact that no earlier run produced.
class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string& what) : Error("stage dependency unmet: " + what) {}
};

struct ProviderSet {
  std::shared_ptr<Provider> reasoning;
  std::shared_ptr<Provider> base;
  std::map<std::string, std::shared_ptr<Provider>> judges;  // by judge name
};

/// One mock provider for every role, or one OpenAI-compatible client per endpoint.
inline ProviderSet make_providers(const RunConfig& cfg) {
  ProviderSet p;
  if (cfg.mock_dir) {
    auto mock = std::make_shared<MockProvider>(*cfg.mock_dir);
    p.reasoning = p.base = mock;
    for (const auto& j : cfg.judges) p.judges[j.name] = mock;
    return p;
  }
  auto live = [](const EndpointConfig& e) -> std::shared_ptr<Provider> {
    if (e.base_url.empty()) throw ValidationError("model " + e.name + " has no base_url (use --mock for offline runs)");
    return std::make_shared<OpenAIProvider>(OpenAIConfig{e.base_url, e.api_key_env});
  };
  p.reasoning = live(cfg.reasoning);
  p.base = live(cfg.base);
  for (const auto& j : cfg.judges) p.judges[j.name] = live(j);
  return p;
}

struct StageReport {
  Stage stage = Stage::Ingest;
  std::size_t done = 0, skipped = 0, failed = 0;
};

class Pipeline {
 public:
  Pipeline(RunConfig cfg, ProviderSet providers) : cfg_(std::move(cfg)), providers_(std::move(providers)) {
    validate_run_config(cfg_);
    root_ = cfg_.dataset_root();
    manifest_ = Manifest::load(root_ / "manifest.json");
  }

  explicit Pipeline(RunConfig cfg) : Pipeline(cfg, make_providers(cfg)) {}

  const RunConfig& config() const noexcept { return cfg_; }
  const Manifest& manifest() const noexcept { return manifest_; }
  const fs::path& root() const noexcept { return root_; }

  /// Every enabled stage in dependency order.
  std::vector<StageReport> run(const std::function<void(const StageReport&)>& on_stage = {}) {
    std::vector<StageReport> out;
    for (auto s : kAllStages) {
      if (!cfg_.stage_enabled(s)) continue;
      out.push_back(run_stage(s));
      if (on_stage) on_stage(out.back());
    }
    return out;
  }

  StageReport run_stage(Stage s) {
    switch (s) {
      case Stage::Ingest: return ingest();
      case Stage::CoT: return cot();
      case Stage::Parse: return parse();
      case Stage::Structure: return structure();
      case Stage::Segment: return segment();
      case Stage::Refine: return refine();
      case Stage::GenEX: return genex();
      case Stage::Judge: return judge();
      case Stage::Evaluate: return evaluate_stage();
      case Stage::Validate: return validate_stage();
      case Stage::Report: return report();
    }
    throw Error("unknown stage");
  }

  fs::path artifact(Stage s, const std::string& id) const { return root_ / to_string(s) / (id + ".json"); }
  fs::path instances_path() const { return root_ / "instances.jsonl"; }
  fs::path judge_file(const std::string& judge, JudgeMethod m, Variant v) const {
    return root_ / "judge" / judge / to_string(m) / (std::string(to_string(v)) + ".ndjson");
  }
  fs::path evaluation_path() const { return root_ / "evaluate" / "evaluation.json"; }
  fs::path report_path(const std::string& suffix) const { return root_ / "report" / (cfg_.dataset_name + suffix); }

  std::vector<Instance> instances() const {
    const auto text = read_file_if_exists(instances_path());
    if (!text) throw DependencyError("no ingested instances at " + instances_path().string() + " (run ingest first)");
    std::istringstream in(*text);
    return parse_dataset(in, cfg_.schema, instances_path().string());
  }

 private:
  /// What a per-instance stage computes: the artifact body, plus a failure
  /// reason when the artifact is partial.
  struct Computed {
    std::string content;
    std::optional<std::string> failure;
  };

  /// Upstream failed for this instance; the instance fails with this reason.
  struct UpstreamFailed {
    std::string reason;
  };

  ExtractionConfig extraction() const {
    ExtractionConfig e;
    e.reasoning_model = cfg_.reasoning.model;
    e.base_model = cfg_.base.model;
    e.max_tokens = cfg_.extraction_max_tokens;
    return e;
  }

  std::shared_ptr<CompletionCache> cache() {
    if (!cache_) cache_ = std::make_shared<CompletionCache>(cfg_.cache_dir);
    return cache_;
  }

  Gateway& gateway(const std::string& role, const std::shared_ptr<Provider>& provider) {
    std::lock_guard lock(gw_mutex_);
    auto& slot = gateways_[role];
    if (!slot) {
      if (!provider) throw ValidationError("no provider for " + role);
      RetryPolicy retry{cfg_.retry_attempts, std::chrono::milliseconds(cfg_.retry_backoff_ms), 2.0};
      slot = std::make_unique<Gateway>(provider, cache(), retry, cfg_.workers);
    }
    return *slot;
  }

  Gateway& reasoning_gw() { return gateway("reasoning", providers_.reasoning); }
  Gateway& base_gw() { return gateway("base", providers_.base); }
  Gateway& judge_gw(const std::string& name) {
    auto it = providers_.judges.find(name);
    return gateway("judge:" + name, it == providers_.judges.end() ? nullptr : it->second);
  }

  /// Artifact text of an upstream stage for one instance.
  std::string upstream(Stage from, Stage needed, const Instance& inst) const {
    if (const auto* e = manifest_.find(to_string(needed), inst.id); e && e->status == InstanceStatus::Failed)
      throw UpstreamFailed{std::string(to_string(needed)) + " failed: " + e->reason};
    if (auto text = read_file_if_exists(artifact(needed, inst.id))) return *text;
    throw DependencyError(std::string(to_string(from)) + " needs " + to_string(needed) + " output for instance " + inst.id);
  }

  void check_threshold(Stage s, const StageReport& r, std::size_t n) const {
    if (n > 0 && static_cast<double>(r.failed) > cfg_.max_failure_fraction * static_cast<double>(n))
      throw Error(std::string("failure threshold exceeded in stage ") + to_string(s) + ": " + std::to_string(r.failed) +
                  "/" + std::to_string(n) + " instances failed (see " + (root_ / "manifest.json").string() + ")");
  }

  /// Shared driver: hash inputs, reuse unchanged artifacts, compute the rest on
  /// the worker pool, then record every instance in the manifest.
  StageReport per_instance(Stage s, const std::vector<Instance>& insts,
                           const std::function<std::string(const Instance&)>& input_key,
                           const std::function<Computed(const Instance&)>& compute) {
    struct Outcome {
      ManifestEntry entry;
      std::optional<std::string> dependency_error;
    };
    std::vector<Outcome> outcomes(insts.size());
    const std::string stage = to_string(s);
    parallel_for(insts.size(), cfg_.workers, [&](std::size_t i) {
      const Instance& inst = insts[i];
      Outcome& o = outcomes[i];
      const fs::path out = artifact(s, inst.id);
      bool wrote = false;
      try {
        o.entry.input_hash = sha256_hex(stage + "\n" + input_key(inst));
        const auto* prev = manifest_.find(stage, inst.id);
        if (prev && prev->status != InstanceStatus::Failed && prev->input_hash == o.entry.input_hash && fs::exists(out)) {
          o.entry.status = InstanceStatus::Skipped;
          return;
        }
        Computed c = compute(inst);
        write_file_atomic(out, c.content);
        wrote = true;
        o.entry.status = c.failure ? InstanceStatus::Failed : InstanceStatus::Done;
        o.entry.reason = c.failure.value_or("");
      } catch (const DependencyError& e) {
        o.dependency_error = e.what();
      } catch (const UpstreamFailed& e) {
        o.entry.status = InstanceStatus::Failed;
        o.entry.reason = "upstream " + e.reason;
      } catch (const std::exception& e) {
        o.entry.status = InstanceStatus::Failed;
        o.entry.reason = e.what();
      }
      if (o.entry.status == InstanceStatus::Failed && !wrote) {
        std::error_code ec;
        fs::remove(out, ec);  // no stale artifact from an older run
      }
    });
    for (const auto& o : outcomes)
      if (o.dependency_error) throw Error(*o.dependency_error);
    StageReport r{s, 0, 0, 0};
    std::map<std::string, ManifestEntry> entries;
    for (std::size_t i = 0; i < insts.size(); ++i) {
      const auto& e = outcomes[i].entry;
      (e.status == InstanceStatus::Done ? r.done : e.status == InstanceStatus::Skipped ? r.skipped : r.failed)++;
      entries[insts[i].id] = e;
    }
    manifest_.set_stage(stage, std::move(entries));
    manifest_.save();
    check_threshold(s, r, insts.size());
    return r;
  }

  /// Dataset-level stages: one input hash for the whole stage, every instance
  /// listed with the same status.
  StageReport whole_dataset(Stage s, const std::vector<Instance>& insts, const std::string& input_key,
                            const std::vector<fs::path>& outputs, const std::function<void()>& compute) {
    const std::string stage = to_string(s);
    const std::string hash = sha256_hex(stage + "\n" + input_key);
    bool unchanged = !insts.empty();
    for (const auto& inst : insts) {
      const auto* prev = manifest_.find(stage, inst.id);
      unchanged = unchanged && prev && prev->status != InstanceStatus::Failed && prev->input_hash == hash;
    }
    for (const auto& p : outputs) unchanged = unchanged && fs::exists(p);
    if (!unchanged) compute();
    const auto status = unchanged ? InstanceStatus::Skipped : InstanceStatus::Done;
    std::map<std::string, ManifestEntry> entries;
    for (const auto& inst : insts) entries[inst.id] = {status, hash, ""};
    manifest_.set_stage(stage, std::move(entries));
    manifest_.save();
    StageReport r{s, 0, 0, 0};
    (unchanged ? r.skipped : r.done) = insts.size();
    return r;
  }

  // ---- stages -----------------------------------------------------------------

  StageReport ingest() {
    if (cfg_.dataset_path.empty()) throw ValidationError("no dataset path configured");
    const auto insts = load_dataset(cfg_.dataset_path, cfg_.schema);
    std::string body;
    for (const auto& inst : insts) body += instance_to_json(inst).dump() + "\n";
    const bool same_file = read_file_if_exists(instances_path()) == body;
    if (!same_file) write_file_atomic(instances_path(), body);
    StageReport r{Stage::Ingest, 0, 0, 0};
    std::map<std::string, ManifestEntry> entries;
    for (const auto& inst : insts) {
      const std::string hash = sha256_hex(instance_to_json(inst).dump());
      const auto* prev = manifest_.find("ingest", inst.id);
      const bool skip = same_file && prev && prev->input_hash == hash;
      entries[inst.id] = {skip ? InstanceStatus::Skipped : InstanceStatus::Done, hash, ""};
      ++(skip ? r.skipped : r.done);
    }
    manifest_.set_stage("ingest", std::move(entries));
    manifest_.save();
    return r;
  }

  StageReport cot() {
    const auto insts = instances();
    const auto ex = extraction();
    return per_instance(
        Stage::CoT, insts,
        [&](const Instance& inst) { return instance_to_json(inst).dump() + "\n" + ex.reasoning_model + "\n" + std::to_string(ex.max_tokens); },
        [&](const Instance& inst) {
          return Computed{cot_record_to_json(generate_cot(reasoning_gw(), inst, ex)).dump(2) + "\n", std::nullopt};
        });
  }

  StageReport parse() {
    const auto insts = instances();
    const auto ex = extraction();
    return per_instance(
        Stage::Parse, insts, [&](const Instance& inst) { return upstream(Stage::Parse, Stage::CoT, inst) + ex.reasoning_model; },
        [&](const Instance& inst) {
          const auto rec = cot_record_from_json(json::parse(upstream(Stage::Parse, Stage::CoT, inst)));
          const json doc = {{"instance_id", inst.id}, {"text", parse_cot(reasoning_gw(), rec, ex)}};
          return Computed{doc.dump(2) + "\n", std::nullopt};
        });
  }

  StageReport structure() {
    const auto insts = instances();
    const auto ex = extraction();
    return per_instance(
        Stage::Structure, insts,
        [&](const Instance& inst) {
          return instance_to_json(inst).dump() + upstream(Stage::Structure, Stage::Parse, inst) + ex.base_model;
        },
        [&](const Instance& inst) {
          const auto parsed = json::parse(upstream(Stage::Structure, Stage::Parse, inst));
          auto res = structure_el(base_gw(), parsed.at("text").get<std::string>(), inst, ex);
          const json doc = {{"el", el_set_to_json(res.el)}, {"warnings", res.warnings}};
          return Computed{doc.dump(2) + "\n", std::nullopt};
        });
  }

  StageReport segment() {
    const auto insts = instances();
    const ConnectiveLexicon lexicon =
        cfg_.connectives ? ConnectiveLexicon::load(cfg_.connectives->string()) : ConnectiveLexicon::builtin();
    std::unique_ptr<JsonClient> client;
    if (cfg_.segmenter) client = make_json_client(*cfg_.segmenter);
    std::string lexicon_key = cfg_.connectives ? read_file_if_exists(*cfg_.connectives).value_or("") : "builtin";
    return per_instance(
        Stage::Segment, insts,
        [&](const Instance& inst) {
          return upstream(Stage::Segment, Stage::CoT, inst) + lexicon_key + cfg_.segmenter.value_or("builtin");
        },
        [&](const Instance& inst) {
          const auto rec = cot_record_from_json(json::parse(upstream(Stage::Segment, Stage::CoT, inst)));
          const auto edus = client ? external_segment(rec.raw_cot, *client, inst.id) : segment_edus(rec.raw_cot);
          const auto units = unit_union(edus, detect_connective_clauses(rec.raw_cot, lexicon), rec.raw_cot);
          json doc = unit_set_to_json(units);
          json spans = json::array();
          for (const auto& e : edus) spans.push_back(segment_to_json(e));
          doc["edus"] = spans;
          return Computed{doc.dump(2) + "\n", std::nullopt};
        });
  }

  StageReport refine() {
    const auto insts = instances();
    return per_instance(
        Stage::Refine, insts,
        [&](const Instance& inst) {
          std::string key = upstream(Stage::Refine, Stage::Structure, inst);
          key += upstream(Stage::Refine, Stage::Segment, inst);
          return key + format_metric(cfg_.min_ratio);
        },
        [&](const Instance& inst) {
          const auto el = el_set_from_json(json::parse(upstream(Stage::Refine, Stage::Structure, inst)).at("el"));
          const auto units = unit_set_from_json(json::parse(upstream(Stage::Refine, Stage::Segment, inst)));
          const auto res = align_to_units(el, units, cfg_.min_ratio);
          json records = json::array();
          for (const auto& r : res.records) records.push_back(alignment_record_to_json(r));
          const json doc = {{"el", el_set_to_json(res.el)}, {"alignments", records}};
          return Computed{doc.dump(2) + "\n", std::nullopt};
        });
  }

  StageReport genex() {
    const auto insts = instances();
    const auto ex = extraction();
    const bool reasoning = cfg_.genex_role == "reasoning";
    const std::string model = reasoning ? cfg_.reasoning.model : cfg_.base.model;
    return per_instance(
        Stage::GenEX, insts, [&](const Instance& inst) { return instance_to_json(inst).dump() + "\n" + model; },
        [&](const Instance& inst) {
          auto res = genex_el_set(reasoning ? reasoning_gw() : base_gw(), inst, model, ex);
          const json doc = {{"el", el_set_to_json(res.el)}, {"warnings", res.warnings}};
          return Computed{doc.dump(2) + "\n", std::nullopt};
        });
  }

  std::optional<fs::path> human_file(const Instance& inst) const {
    if (!cfg_.human_el_dir) return std::nullopt;
    auto p = *cfg_.human_el_dir / (inst.id + ".json");
    return fs::exists(p) ? std::optional(p) : std::nullopt;
  }

  /// The judge's view of one variant: an EL set, raw parser text, nothing
  /// (baseline), or nullopt when the instance has no human annotation.
  struct VariantInput {
    std::optional<ELSet> el;
    std::optional<std::string> text;
  };

  std::optional<VariantInput> variant_input(Variant v, const Instance& inst) const {
    auto el_of = [&](Stage s) { return el_set_from_json(json::parse(upstream(Stage::Judge, s, inst)).at("el")); };
    switch (v) {
      case Variant::Baseline: return VariantInput{};
      case Variant::Raw: return VariantInput{el_of(Stage::Structure), std::nullopt};
      case Variant::ELSup: return VariantInput{stance_subset(el_of(Stage::Structure), Stance::Support), std::nullopt};
      case Variant::ELOpp: return VariantInput{stance_subset(el_of(Stage::Structure), Stance::Oppose), std::nullopt};
      case Variant::Filtered: return VariantInput{el_of(Stage::Refine), std::nullopt};
      case Variant::FilteredSup: return VariantInput{stance_subset(el_of(Stage::Refine), Stance::Support), std::nullopt};
      case Variant::FilteredOpp: return VariantInput{stance_subset(el_of(Stage::Refine), Stance::Oppose), std::nullopt};
      case Variant::GenEX: return VariantInput{el_of(Stage::GenEX), std::nullopt};
      case Variant::CoTParser:
        return VariantInput{std::nullopt,
                            json::parse(upstream(Stage::Judge, Stage::Parse, inst)).at("text").get<std::string>()};
      case Variant::HumanEX: {
        const auto p = human_file(inst);
        if (!p) return std::nullopt;
        auto el = el_set_from_json(json::parse(*read_file_if_exists(*p)));
        validate_el_set(el, inst);
        return VariantInput{std::move(el), std::nullopt};
      }
    }
    return std::nullopt;
  }

  std::string judge_input_key(const Instance& inst) const {
    std::string key = instance_to_json(inst).dump() + format_metric(cfg_.judge_temperature) + std::to_string(cfg_.judge_max_tokens);
    for (const auto& j : cfg_.judges) key += "|" + j.name + "=" + j.model;
    for (auto m : cfg_.methods) key += std::string("|") + to_string(m);
    for (auto v : cfg_.variants) {
      key += std::string("|") + to_string(v);
      if (auto s = variant_source(v)) key += upstream(Stage::Judge, *s, inst);
      if (v == Variant::HumanEX)
        if (auto p = human_file(inst)) key += read_file_if_exists(*p).value_or("");
    }
    return key;
  }

  StageReport judge() {
    const auto insts = instances();
    if (std::count(cfg_.variants.begin(), cfg_.variants.end(), Variant::HumanEX) && !cfg_.human_el_dir)
      throw DependencyError("variant HumanEX needs human_el_dir in the config");
    auto r = per_instance(Stage::Judge, insts, [&](const Instance& inst) { return judge_input_key(inst); },
                          [&](const Instance& inst) { return judge_instance(inst); });
    assemble_judge_files(insts);
    return r;
  }

  Computed judge_instance(const Instance& inst) {
    json results = json::array();
    std::vector<std::string> errors;
    for (const auto& j : cfg_.judges) {
      const JudgeConfig jc{j.model, cfg_.judge_temperature, cfg_.judge_max_tokens};
      for (auto m : cfg_.methods) {
        for (auto v : cfg_.variants) {
          json rec = {{"judge", j.name}, {"method", to_string(m)}, {"variant", to_string(v)}};
          const auto input = variant_input(v, inst);
          if (!input) continue;  // no human annotation for this instance
          try {
            Injection inj{input->el ? &*input->el : nullptr, input->text ? &*input->text : nullptr};
            rec["output"] = judge_outputs_to_json(run_judge(m, judge_gw(j.name), inst, inj, jc));
          } catch (const DependencyError&) {
            throw;
          } catch (const std::exception& e) {
            rec["error"] = e.what();
            errors.push_back(std::string(to_string(v)) + "/" + to_string(m) + "/" + j.name + ": " + e.what());
          }
          results.push_back(rec);
        }
      }
    }
    const json doc = {{"instance_id", inst.id}, {"results", results}};
    Computed c{doc.dump(2) + "\n", std::nullopt};
    if (!errors.empty()) c.failure = text::join(errors, "; ");
    return c;
  }

  /// One NDJSON file per (judge, method, variant), instances in dataset order.
  void assemble_judge_files(const std::vector<Instance>& insts) {
    std::map<fs::path, std::string> files;
    for (const auto& j : cfg_.judges)
      for (auto m : cfg_.methods)
        for (auto v : cfg_.variants) files[judge_file(j.name, m, v)];
    for (const auto& inst : insts) {
      const auto text = read_file_if_exists(artifact(Stage::Judge, inst.id));
      if (!text) continue;
      const json doc = json::parse(*text);
      for (const auto& rec : doc.at("results")) {
        if (!rec.contains("output")) continue;
        const auto path = judge_file(rec.at("judge").get<std::string>(),
                                     judge_method_from_string(rec.at("method").get<std::string>()),
                                     variant_from_string(rec.at("variant").get<std::string>()));
        if (auto it = files.find(path); it != files.end()) it->second += rec.at("output").dump() + "\n";
      }
    }
    for (const auto& [path, body] : files)
      if (read_file_if_exists(path) != body) write_file_atomic(path, body);
  }

  std::map<JudgeKey, std::vector<JudgeOutputs>> load_judge_outputs(std::string* key) const {
    std::map<JudgeKey, std::vector<JudgeOutputs>> out;
    for (const auto& j : cfg_.judges) {
      for (auto m : cfg_.methods) {
        for (auto v : cfg_.variants) {
          const auto path = judge_file(j.name, m, v);
          const auto text = read_file_if_exists(path);
          if (!text) throw DependencyError("evaluate needs judge output " + path.string());
          if (key) *key += path.string() + "\n" + *text;
          auto& list = out[{j.name, m, to_string(v)}];
          std::istringstream in(*text);
          for (std::string line; std::getline(in, line);)
            if (!text::trim_view(line).empty()) list.push_back(judge_outputs_from_json(json::parse(line)));
        }
      }
    }
    return out;
  }

  StageReport evaluate_stage() {
    const auto insts = instances();
    std::string key = *read_file_if_exists(instances_path()) + (cfg_.tau == KendallVariant::TauA ? "tau-a" : "tau-b");
    const auto outputs = load_judge_outputs(&key);
    return whole_dataset(Stage::Evaluate, insts, key, {evaluation_path()}, [&] {
      std::vector<std::string> judges, variants;
      for (const auto& j : cfg_.judges) judges.push_back(j.name);
      for (auto v : cfg_.variants) variants.push_back(to_string(v));
      const auto ev = evaluate(cfg_.dataset_name, cfg_.schema == SchemaKind::NLI ? TaskKind::NLI : TaskKind::MCQA, insts,
                               judges, variants, cfg_.methods, outputs, cfg_.tau);
      write_file_atomic(evaluation_path(), evaluation_to_json(ev).dump(2) + "\n");
    });
  }

  StageReport validate_stage() {
    const auto insts = instances();
    std::string key = format_metric(cfg_.weights.sum()) + cfg_.tagger.value_or("coarse") + cfg_.embedder.value_or("hashing");
    for (double w : {cfg_.weights.lexical, cfg_.weights.syntactic, cfg_.weights.semantic_cos, cfg_.weights.semantic_euc,
                     cfg_.weights.lev_ratio})
      key += "," + format_metric(w);
    // machine sets from whichever extraction stages have run
    std::vector<std::pair<Stage, std::string>> sources;
    for (auto s : {Stage::Structure, Stage::Refine, Stage::GenEX})
      if (manifest_.stages().count(to_string(s))) sources.push_back({s, s == Stage::Structure ? "Raw" : s == Stage::Refine ? "Filtered" : "GenEX"});
    if (sources.empty()) throw DependencyError("validate needs structure, refine or genex output");
    std::map<std::string, std::vector<std::pair<ELSet, ELSet>>> pairs;
    for (const auto& inst : insts) {
      const auto hp = human_file(inst);
      if (!hp) continue;
      const auto htext = *read_file_if_exists(*hp);
      key += inst.id + htext;
      auto human = el_set_from_json(json::parse(htext));
      validate_el_set(human, inst);
      for (const auto& [s, tag] : sources) {
        const auto mtext = read_file_if_exists(artifact(s, inst.id));
        if (!mtext) continue;
        key += *mtext;
        pairs[tag].push_back({el_set_from_json(json::parse(*mtext).at("el")), human});
      }
    }
    const fs::path out = root_ / "validate" / "validation.json";
    return whole_dataset(Stage::Validate, insts, key, {out}, [&] {
      std::unique_ptr<Tagger> tagger = cfg_.tagger ? std::unique_ptr<Tagger>(std::make_unique<ExternalTagger>(make_json_client(*cfg_.tagger)))
                                                   : std::make_unique<CoarseTagger>();
      std::unique_ptr<Embedder> embedder =
          cfg_.embedder ? std::unique_ptr<Embedder>(std::make_unique<ExternalEmbedder>(make_json_client(*cfg_.embedder)))
                        : std::make_unique<HashingEmbedder>();
      ScoringContext ctx{*tagger, *embedder, cfg_.weights};
      json doc = json::object();
      for (const auto& [tag, list] : pairs) doc[tag] = validation_report_to_json(validate_corpus(list, ctx));
      write_file_atomic(out, doc.dump(2) + "\n");
    });
  }

  StageReport report() {
    const auto insts = instances();
    const auto text = read_file_if_exists(evaluation_path());
    if (!text) throw DependencyError("report needs evaluate output " + evaluation_path().string());
    const std::vector<fs::path> outs = {report_path(".csv"), report_path(".json"), report_path("_long.csv")};
    return whole_dataset(Stage::Report, insts, *text, outs, [&] {
      const auto ev = evaluation_from_json(json::parse(*text));
      write_file_atomic(outs[0], report_csv(ev));
      write_file_atomic(outs[1], report_json(ev).dump(2) + "\n");
      write_file_atomic(outs[2], long_csv(ev));
    });
  }

  RunConfig cfg_;
  ProviderSet providers_;
  fs::path root_;
  Manifest manifest_;
  std::shared_ptr<CompletionCache> cache_;
  std::mutex gw_mutex_;
  std::map<std::string, std::unique_ptr<Gateway>> gateways_;
};

}  // namespace cot2el
