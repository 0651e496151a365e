#include "neurolabel/error.hpp"

namespace nlab {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_label: return "invalid-label";
    case Errc::empty_scoreboard: return "empty-scoreboard";
    case Errc::empty_activation: return "empty-activation";
    case Errc::non_finite_activation: return "non-finite-activation";
    case Errc::degenerate_control: return "degenerate-control";
    case Errc::layer_shape: return "layer-shape";
    case Errc::configuration: return "configuration";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::malformed_response: return "malformed-response";
    case Errc::forbidden_exhausted: return "forbidden-exhausted";
    case Errc::transcript_exhausted: return "transcript-exhausted";
    case Errc::arity: return "arity";
    case Errc::provider: return "provider";
    case Errc::protocol: return "protocol";
    case Errc::payload_too_large: return "payload-too-large";
    case Errc::io: return "io";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message, bool retryable)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      retryable_(retryable) {}

ProviderError::ProviderError(const std::string& message, int status, bool retryable)
    : Error(Errc::provider, message, retryable), status_(status) {}

}  // namespace nlab
