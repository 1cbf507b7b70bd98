#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cot2el/core/types.hpp"

namespace testing_support {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(COT2EL_SOURCE_DIR) / rel;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cot2el_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline cot2el::Instance ash_instance() {
  cot2el::Instance inst;
  inst.id = "siqa-ash";
  inst.task_kind = cot2el::TaskKind::MCQA;
  inst.context = "Ash redeemed themselves after retaking the test they failed.";
  inst.question = "How will Ash feel as a result?";
  inst.options = {{'A', "relieved"}, {'B', "accomplished"}, {'C', "proud"}};
  inst.gold.kind = cot2el::GoldAnnotation::Kind::LikertScores;
  inst.gold.likert = {{4, 4, 5}, {5, 4, 5}, {3, 4, 4}};
  return inst;
}

inline cot2el::Instance nli_instance(const std::string& id = "nli-1") {
  cot2el::Instance inst;
  inst.id = id;
  inst.task_kind = cot2el::TaskKind::NLI;
  inst.context = "A man is playing a guitar on stage.";
  inst.question = "A musician is performing.";
  inst.options = {{'A', "Entailment"}, {'B', "Neutral"}, {'C', "Contradiction"}};
  inst.gold.kind = cot2el::GoldAnnotation::Kind::DistributionSources;
  inst.gold.distribution_sources = {{"mnli", {0.8, 0.2, 0.0}}, {"varierr", {0.5, 0.5, 0.0}}};
  return inst;
}

/// Uniform random permutation of 1..n as doubles.
inline std::vector<double> random_permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i + 1);
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

/// Random probability vector; with `sparse`, some entries are exactly zero.
inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, bool sparse = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  double sum = 0.0;
  for (auto& x : v) {
    x = u(rng);
    if (sparse && u(rng) < 0.3) x = 0.0;
    sum += x;
  }
  if (sum == 0.0) {
    v[0] = 1.0;
    sum = 1.0;
  }
  for (auto& x : v) x /= sum;
  return v;
}

}  // namespace testing_support
