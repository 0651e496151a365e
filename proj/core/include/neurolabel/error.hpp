#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlab {

enum class Errc {
  invalid_label,
  empty_scoreboard,
  empty_activation,
  non_finite_activation,
  degenerate_control,
  layer_shape,
  configuration,
  insufficient_data,
  malformed_response,
  forbidden_exhausted,
  transcript_exhausted,
  arity,
  provider,
  protocol,
  payload_too_large,
  io,
};

std::string_view to_string(Errc code) noexcept;

/// Base error for everything thrown by the library. `retryable()` marks
/// transient provider failures that a retry loop may attempt again.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, bool retryable = false);

  Errc code() const noexcept { return code_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  Errc code_;
  bool retryable_;
};

/// Failure reported by a remote or simulated model provider.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& message, int status, bool retryable);

  /// HTTP status, 0 for transport-level failures.
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace nlab
