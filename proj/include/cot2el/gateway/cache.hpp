#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <thread>

#include "cot2el/gateway/completion.hpp"

namespace cot2el {

/// One file per request key: <dir>/<key>.json holding {key, request, response}.
/// Writes go through a temp file and rename, so readers never see partial files.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".json"); }

  std::optional<Completion> lookup(const std::string& key) const {
    std::shared_lock lock(mutex_);
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      return completion_from_json(json::parse(ss.str()).at("response"));
    } catch (const json::exception&) {
      return std::nullopt;  // treat a corrupt entry as a miss; it gets rewritten
    }
  }

  void store(const std::string& key, const CompletionRequest& req, const Completion& c) {
    const json payload = {{"key", key}, {"request", request_to_json(req)}, {"response", completion_to_json(c)}};
    std::unique_lock lock(mutex_);
    const auto tmp = dir_ / (key + ".tmp." + std::to_string(++counter_));
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw Error("cannot write cache file " + tmp.string());
      out << payload.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path_for(key));
  }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::atomic<unsigned long> counter_{0};
};

}  // namespace cot2el
