#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"

namespace cot2el {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class InstanceStatus { Done, Skipped, Failed };

inline const char* to_string(InstanceStatus s) {
  switch (s) {
    case InstanceStatus::Done: return "done";
    case InstanceStatus::Skipped: return "skipped";
    case InstanceStatus::Failed: return "failed";
  }
  return "?";
}

inline InstanceStatus instance_status_from_string(const std::string& s) {
  if (s == "done") return InstanceStatus::Done;
  if (s == "skipped") return InstanceStatus::Skipped;
  if (s == "failed") return InstanceStatus::Failed;
  throw ValidationError("unknown manifest status " + s);
}

struct ManifestEntry {
  InstanceStatus status = InstanceStatus::Done;
  std::string input_hash;
  std::string reason;  // why it failed or was skipped without output
};

/// stage -> instance id -> entry. Each stage lists every instance it saw once.
class Manifest {
 public:
  static Manifest load(const fs::path& path) {
    Manifest m;
    m.path_ = path;
    std::ifstream in(path);
    if (!in) return m;
    json j;
    try {
      j = json::parse(in);
      for (const auto& [stage, entries] : j.at("stages").items())
        for (const auto& [id, e] : entries.items())
          m.stages_[stage][id] = {instance_status_from_string(e.at("status").get<std::string>()),
                                  e.value("input_hash", ""), e.value("reason", "")};
    } catch (const json::exception& e) {
      throw ValidationError("corrupt manifest " + path.string() + ": " + e.what());
    }
    return m;
  }

  const ManifestEntry* find(const std::string& stage, const std::string& id) const {
    auto s = stages_.find(stage);
    if (s == stages_.end()) return nullptr;
    auto e = s->second.find(id);
    return e == s->second.end() ? nullptr : &e->second;
  }

  /// Replaces a stage's entries wholesale, so instances dropped from the dataset disappear.
  void set_stage(const std::string& stage, std::map<std::string, ManifestEntry> entries) {
    stages_[stage] = std::move(entries);
  }

  const std::map<std::string, std::map<std::string, ManifestEntry>>& stages() const noexcept { return stages_; }

  json to_json() const {
    json stages = json::object();
    for (const auto& [stage, entries] : stages_) {
      json es = json::object();
      for (const auto& [id, e] : entries) {
        json ej = {{"status", to_string(e.status)}, {"input_hash", e.input_hash}};
        if (!e.reason.empty()) ej["reason"] = e.reason;
        es[id] = ej;
      }
      stages[stage] = es;
    }
    return {{"stages", stages}};
  }

  void save() const;

 private:
  fs::path path_;
  std::map<std::string, std::map<std::string, ManifestEntry>> stages_;
};

/// Writes through a temp file and rename.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::optional<std::string> read_file_if_exists(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void Manifest::save() const { write_file_atomic(path_, to_json().dump(2) + "\n"); }

/// Runs fn(i) for i in [0, n) on up to `workers` threads. fn must not throw.
template <class F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
}

}  // namespace cot2el
