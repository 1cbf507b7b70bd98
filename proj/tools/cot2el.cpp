// cot2el: stage runner for the EL extraction and judge-evaluation pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cot2el/pipeline/pipeline.hpp"

using namespace cot2el;

namespace {

struct Options {
  std::string config;
  std::string cache_dir;
  std::string artifacts_dir;
  std::string mock;
  std::string dataset;
  std::string schema;
  std::string name;
  int workers = 0;
  bool tau_a = false;
  std::optional<double> min_ratio;
};

RunConfig build_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (!o.dataset.empty()) {
    cfg.dataset_path = o.dataset;
    cfg.dataset_name = fs::path(o.dataset).stem().string();
  }
  if (!o.schema.empty()) cfg.schema = schema_kind_from_string(o.schema);
  if (!o.name.empty()) cfg.dataset_name = o.name;
  if (!o.cache_dir.empty()) cfg.cache_dir = o.cache_dir;
  if (!o.artifacts_dir.empty()) cfg.artifacts_dir = o.artifacts_dir;
  if (!o.mock.empty()) cfg.mock_dir = fs::path(o.mock);
  if (o.workers > 0) cfg.workers = o.workers;
  if (o.tau_a) cfg.tau = KendallVariant::TauA;
  if (o.min_ratio) cfg.min_ratio = *o.min_ratio;
  return cfg;
}

void print(const StageReport& r) {
  std::printf("%-9s done %zu  skipped %zu  failed %zu\n", to_string(r.stage), r.done, r.skipped, r.failed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explanation-label extraction from reasoning traces and LLM-as-judge evaluation"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--cache-dir", o.cache_dir, "completion cache directory");
  app.add_option("--artifacts-dir", o.artifacts_dir, "artifact tree root");
  app.add_option("--workers", o.workers, "instances processed in parallel")->check(CLI::PositiveNumber);
  app.add_option("--mock", o.mock, "answer every model call from fixture rules in this directory")
      ->check(CLI::ExistingDirectory);
  app.add_flag("--tau-a", o.tau_a, "report Kendall tau-a instead of tau-b");
  app.add_option("--min-ratio", o.min_ratio, "drop explanations whose best unit ratio is below this")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--dataset", o.dataset, "dataset file (overrides the config)");
  app.add_option("--schema", o.schema, "nli, siqa or cqa (overrides the config)");
  app.add_option("--name", o.name, "dataset name used for the artifact directory");

  std::optional<Stage> single;
  const std::vector<std::pair<Stage, const char*>> stages = {
      {Stage::Ingest, "load and validate the dataset"},
      {Stage::CoT, "generate reasoning traces"},
      {Stage::Parse, "list supporting and opposing sentences per option"},
      {Stage::Structure, "convert parser output into EL sets"},
      {Stage::Segment, "segment traces into discourse units"},
      {Stage::Refine, "align explanations to their closest unit"},
      {Stage::GenEX, "generate label-conditioned explanations"},
      {Stage::Judge, "run the ranking judges on every variant"},
      {Stage::Evaluate, "score judge outputs against gold"},
      {Stage::Validate, "compare machine EL sets with human annotations"},
      {Stage::Report, "write the per-dataset tables"},
  };
  for (const auto& [stage, help] : stages) {
    auto* sub = app.add_subcommand(to_string(stage), help);
    sub->callback([&single, s = stage] { single = s; });
  }
  app.add_subcommand("run", "run every enabled stage in order");

  CLI11_PARSE(app, argc, argv);

  try {
    Pipeline pipeline(build_config(o));
    if (single) {
      print(pipeline.run_stage(*single));
    } else {
      pipeline.run(print);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
