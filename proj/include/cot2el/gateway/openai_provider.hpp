#pragma once

#include <cstdlib>
#include <map>
#include <string>

#include <httplib.h>

#include "cot2el/gateway/completion.hpp"

namespace cot2el {

struct OpenAIConfig {
  /// e.g. "https://api.deepseek.com/v1" or "http://localhost:8000/v1"
  std::string base_url;
  /// Environment variable holding the API key; empty means no Authorization header.
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 600;
  int top_logprobs = 20;
};

/// OpenAI-compatible chat-completions client.
class OpenAIProvider : public Provider {
 public:
  explicit OpenAIProvider(OpenAIConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.base_url.find("://");
    if (scheme_end == std::string::npos) throw GatewayError("endpoint URL needs a scheme: " + cfg_.base_url);
    const auto path_start = cfg_.base_url.find('/', scheme_end + 3);
    origin_ = cfg_.base_url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : cfg_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (!cfg_.api_key_env.empty()) {
      if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
    }
  }

  std::string name() const override { return "openai:" + cfg_.base_url; }

  json build_payload(const CompletionRequest& req) const {
    json messages = json::array();
    if (req.system_prompt) messages.push_back({{"role", "system"}, {"content", *req.system_prompt}});
    messages.push_back({{"role", "user"}, {"content", req.prompt}});
    json body = {{"model", req.model},
                 {"messages", messages},
                 {"temperature", req.temperature},
                 {"max_tokens", req.max_tokens},
                 {"stream", false}};
    if (req.want_first_token_logits) {
      body["logprobs"] = true;
      body["top_logprobs"] = cfg_.top_logprobs;
    }
    return body;
  }

  static Completion parse_response(const json& resp) {
    if (!resp.contains("choices") || !resp.at("choices").is_array() || resp.at("choices").empty())
      throw GatewayError("response has no choices");
    const auto& choice = resp.at("choices").at(0);
    Completion c;
    const auto& msg = choice.value("message", json::object());
    if (msg.contains("content") && msg.at("content").is_string()) c.text = msg.at("content").get<std::string>();
    for (const char* k : {"reasoning_content", "reasoning"}) {
      if (msg.contains(k) && msg.at(k).is_string()) {
        c.reasoning = msg.at(k).get<std::string>();
        break;
      }
    }
    if (choice.contains("logprobs") && choice.at("logprobs").is_object()) {
      const auto& lp = choice.at("logprobs");
      if (lp.contains("content") && lp.at("content").is_array() && !lp.at("content").empty()) {
        const auto& first = lp.at("content").at(0);
        std::map<std::string, double> m;
        if (first.contains("top_logprobs"))
          for (const auto& t : first.at("top_logprobs")) m[t.at("token").get<std::string>()] = t.at("logprob").get<double>();
        if (first.contains("token") && first.contains("logprob"))
          m.emplace(first.at("token").get<std::string>(), first.at("logprob").get<double>());
        if (!m.empty()) c.first_token_logits = std::move(m);
      }
    }
    c.provider_meta = {{"id", resp.value("id", "")}, {"model", resp.value("model", "")}};
    if (choice.contains("finish_reason") && choice.at("finish_reason").is_string())
      c.provider_meta["finish_reason"] = choice.at("finish_reason");
    return c;
  }

  Completion complete(const CompletionRequest& req) override {
    httplib::Client cli(origin_);
    cli.set_connection_timeout(30);
    cli.set_read_timeout(cfg_.timeout_seconds);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(path_prefix_ + "/chat/completions", headers, build_payload(req).dump(), "application/json");
    if (!res) throw GatewayError("request to " + origin_ + " failed: " + httplib::to_string(res.error()), 0);
    if (res->status != 200)
      throw GatewayError("HTTP " + std::to_string(res->status) + " from " + origin_ + ": " + res->body.substr(0, 500),
                         res->status);
    try {
      return parse_response(json::parse(res->body));
    } catch (const json::exception& e) {
      throw GatewayError(std::string("unparseable response body: ") + e.what(), res->status);
    }
  }

 private:
  OpenAIConfig cfg_;
  std::string origin_;
  std::string path_prefix_;
  std::string api_key_;
};

}  // namespace cot2el
