#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <thread>

#include "neurolabel/error.hpp"

namespace nlab {

/// Bounded retry with doubling backoff: attempt i (0-based) is preceded by a
/// wait of backoff_ms * 2^(i-1), so waits strictly increase.
struct RetryPolicy {
  std::size_t attempts = 3;
  std::size_t backoff_ms = 0;

  std::chrono::milliseconds delay_before(std::size_t attempt) const {
    if (attempt == 0) return std::chrono::milliseconds{0};
    return std::chrono::milliseconds{backoff_ms << (attempt - 1)};
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Runs `fn` until it returns or throws a non-retryable error. The last
/// retryable error is rethrown once the policy's attempts are spent.
template <class Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn, const Sleeper& sleeper = sleep_for)
    -> decltype(fn()) {
  const std::size_t attempts = policy.attempts == 0 ? 1 : policy.attempts;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt > 0) {
      const auto delay = policy.delay_before(attempt);
      if (delay.count() > 0) sleeper(delay);
    }
    try {
      return fn();
    } catch (const Error& err) {
      if (!err.retryable() || attempt + 1 >= attempts) throw;
    }
  }
}

}  // namespace nlab
