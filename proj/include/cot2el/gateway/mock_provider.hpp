#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cot2el/gateway/completion.hpp"

namespace cot2el {

/// Replays completions from a fixture directory.
///
/// Every `*.json` file holds one rule object or an array of rules. A rule is
/// either keyed by the exact cache key, `{"key": "<sha256>", "response": {...}}`,
/// or selects requests by content:
///
///   {"match": {"model": "r1", "run_index": 1, "logits": true,
///              "contains": ["Scenario: Ash", "rank all"],
///              "not_contains": ["Explanations:"],
///              "system_contains": ["EXAMPLE JSON"]},
///    "response": {"text": "...", "reasoning": "...", "first_token_logits": {"A": 0.5}}}
///
/// Every present condition must hold. Exact-key rules win; otherwise the first
/// matching rule in (file name, array position) order is used.
class MockProvider : public Provider {
 public:
  explicit MockProvider(const std::filesystem::path& fixture_dir) {
    if (!std::filesystem::is_directory(fixture_dir))
      throw GatewayError("mock fixture directory not found: " + fixture_dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(fixture_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f);
      std::stringstream ss;
      ss << in.rdbuf();
      json doc;
      try {
        doc = json::parse(ss.str());
      } catch (const json::exception& e) {
        throw GatewayError("bad fixture file " + f.string() + ": " + e.what());
      }
      if (doc.is_array()) {
        for (auto& r : doc) add_rule(r, f);
      } else {
        add_rule(doc, f);
      }
    }
  }

  /// Builds a provider from in-memory rules (tests).
  explicit MockProvider(const json& rules) {
    for (const auto& r : rules) add_rule(r, "<memory>");
  }

  Completion complete(const CompletionRequest& req) override {
    const auto key = cache_key(req);
    if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;
    for (const auto& rule : rules_)
      if (matches(rule.match, req)) return rule.response;
    throw FixtureMissError("no fixture for key " + key);
  }

  std::string name() const override { return "mock"; }

  std::size_t rule_count() const noexcept { return rules_.size() + by_key_.size(); }

 private:
  struct Rule {
    json match;
    Completion response;
  };

  static Completion parse_response(const json& r) {
    if (r.contains("response")) return completion_from_json(r.at("response"));
    return completion_from_json(r);
  }

  void add_rule(const json& r, const std::filesystem::path& origin) {
    if (!r.is_object()) throw GatewayError("fixture rule must be an object in " + origin.string());
    if (r.contains("key")) {
      by_key_[r.at("key").get<std::string>()] = parse_response(r);
    } else {
      rules_.push_back({r.value("match", json::object()), parse_response(r)});
    }
  }

  static bool contains_all(const std::string& hay, const json& needles) {
    if (needles.is_string()) return hay.find(needles.get<std::string>()) != std::string::npos;
    for (const auto& n : needles)
      if (hay.find(n.get<std::string>()) == std::string::npos) return false;
    return true;
  }

  static bool contains_none(const std::string& hay, const json& needles) {
    if (needles.is_string()) return hay.find(needles.get<std::string>()) == std::string::npos;
    for (const auto& n : needles)
      if (hay.find(n.get<std::string>()) != std::string::npos) return false;
    return true;
  }

  static bool matches(const json& m, const CompletionRequest& req) {
    if (m.contains("model") && m.at("model").get<std::string>() != req.model) return false;
    if (m.contains("run_index") && m.at("run_index").get<int>() != req.run_index) return false;
    if (m.contains("logits") && m.at("logits").get<bool>() != req.want_first_token_logits) return false;
    if (m.contains("contains") && !contains_all(req.prompt, m.at("contains"))) return false;
    if (m.contains("not_contains") && !contains_none(req.prompt, m.at("not_contains"))) return false;
    if (m.contains("system_contains")) {
      if (!req.system_prompt || !contains_all(*req.system_prompt, m.at("system_contains"))) return false;
    }
    if (m.contains("no_system") && m.at("no_system").get<bool>() && req.system_prompt) return false;
    return true;
  }

  std::map<std::string, Completion> by_key_;
  std::vector<Rule> rules_;
};

}  // namespace cot2el
