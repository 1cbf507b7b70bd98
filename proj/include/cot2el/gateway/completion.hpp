#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cot2el/core/error.hpp"
#include "cot2el/util/hash.hpp"

namespace cot2el {

using json = nlohmann::json;

struct CompletionRequest {
  std::string model;
  std::string prompt;
  std::optional<std::string> system_prompt;
  double temperature = 0.0;
  int max_tokens = 1024;
  bool want_first_token_logits = false;
  int run_index = 0;
};

struct Completion {
  std::string text;
  /// Reasoning segment when the provider returns it separately from the answer.
  std::optional<std::string> reasoning;
  /// Token -> logit (or log-probability) for the first generated token.
  std::optional<std::map<std::string, double>> first_token_logits;
  json provider_meta = json::object();

  bool operator==(const Completion&) const = default;
};

inline void validate_request(const CompletionRequest& r) {
  if (!(r.temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
  if (r.run_index < 0 || r.run_index > 2) throw ValidationError("run_index must be 0, 1 or 2");
  if (r.max_tokens <= 0) throw ValidationError("max_tokens must be positive");
}

inline json request_to_json(const CompletionRequest& r) {
  return {{"model", r.model},
          {"prompt", r.prompt},
          {"system_prompt", r.system_prompt ? json(*r.system_prompt) : json(nullptr)},
          {"temperature", r.temperature},
          {"max_tokens", r.max_tokens},
          {"want_first_token_logits", r.want_first_token_logits},
          {"run_index", r.run_index}};
}

inline CompletionRequest request_from_json(const json& j) {
  CompletionRequest r;
  r.model = j.at("model").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  if (!j.at("system_prompt").is_null()) r.system_prompt = j.at("system_prompt").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.max_tokens = j.at("max_tokens").get<int>();
  r.want_first_token_logits = j.at("want_first_token_logits").get<bool>();
  r.run_index = j.at("run_index").get<int>();
  return r;
}

/// Content hash over every request field. nlohmann objects serialize with
/// sorted keys, so the dump is canonical.
inline std::string cache_key(const CompletionRequest& r) { return sha256_hex(request_to_json(r).dump()); }

inline json completion_to_json(const Completion& c) {
  json j = {{"text", c.text}, {"provider_meta", c.provider_meta}};
  j["reasoning"] = c.reasoning ? json(*c.reasoning) : json(nullptr);
  j["first_token_logits"] = c.first_token_logits ? json(*c.first_token_logits) : json(nullptr);
  return j;
}

inline Completion completion_from_json(const json& j) {
  Completion c;
  c.text = j.value("text", "");
  if (j.contains("reasoning") && !j.at("reasoning").is_null()) c.reasoning = j.at("reasoning").get<std::string>();
  if (j.contains("first_token_logits") && !j.at("first_token_logits").is_null())
    c.first_token_logits = j.at("first_token_logits").get<std::map<std::string, double>>();
  if (j.contains("provider_meta")) c.provider_meta = j.at("provider_meta");
  return c;
}

/// A backend that turns requests into completions.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual Completion complete(const CompletionRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Fixture lookups that fail are not transient; the gateway does not retry them.
class FixtureMissError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

}  // namespace cot2el
