#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>

#include "cot2el/gateway/cache.hpp"
#include "cot2el/gateway/completion.hpp"

namespace cot2el {

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
};

struct GatewayStats {
  std::atomic<std::size_t> provider_calls{0};
  std::atomic<std::size_t> cache_hits{0};
};

/// Cached, retrying front door to a Provider with a bound on in-flight calls.
class Gateway {
 public:
  static constexpr std::ptrdiff_t kMaxInflight = 64;

  Gateway(std::shared_ptr<Provider> provider, std::shared_ptr<CompletionCache> cache, RetryPolicy retry = {},
          int max_inflight = 4)
      : provider_(std::move(provider)),
        cache_(std::move(cache)),
        retry_(retry),
        slots_(std::clamp<std::ptrdiff_t>(max_inflight, 1, kMaxInflight)) {
    if (!provider_) throw GatewayError("gateway needs a provider");
  }

  Completion complete(const CompletionRequest& req) {
    validate_request(req);
    const auto key = cache_key(req);
    if (cache_) {
      if (auto hit = cache_->lookup(key)) {
        ++stats_.cache_hits;
        return *hit;
      }
    }
    Completion c = call_with_retry(req);
    if (cache_) cache_->store(key, req, c);
    return c;
  }

  const GatewayStats& stats() const noexcept { return stats_; }
  Provider& provider() noexcept { return *provider_; }
  CompletionCache* cache() noexcept { return cache_.get(); }

 private:
  Completion call_with_retry(const CompletionRequest& req) {
    auto backoff = retry_.initial_backoff;
    int last_status = 0;
    std::string last_msg;
    for (int attempt = 1; attempt <= std::max(1, retry_.attempts); ++attempt) {
      try {
        slots_.acquire();
        struct Release {
          std::counting_semaphore<kMaxInflight>& s;
          ~Release() { s.release(); }
        } release{slots_};
        ++stats_.provider_calls;
        return provider_->complete(req);
      } catch (const FixtureMissError&) {
        throw;
      } catch (const GatewayError& e) {
        last_status = e.status();
        last_msg = e.what();
        // 4xx other than rate limiting will not improve on retry
        if (last_status >= 400 && last_status < 500 && last_status != 429) break;
      }
      if (attempt < retry_.attempts) {
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(backoff.count()) * retry_.multiplier));
      }
    }
    throw GatewayError("provider failed after retries (last status " + std::to_string(last_status) + "): " + last_msg,
                       last_status);
  }

  std::shared_ptr<Provider> provider_;
  std::shared_ptr<CompletionCache> cache_;
  RetryPolicy retry_;
  std::counting_semaphore<kMaxInflight> slots_;
  GatewayStats stats_;
};

}  // namespace cot2el
