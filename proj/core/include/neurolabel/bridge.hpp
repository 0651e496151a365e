#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurolabel/activation.hpp"
#include "neurolabel/eval.hpp"
#include "neurolabel/image.hpp"
#include "neurolabel/proposer.hpp"
#include "neurolabel/retry.hpp"
#include "neurolabel/synthesis.hpp"

namespace nlab {

/// Environment variable holding the bearer token for bridge endpoints.
inline constexpr const char* kApiKeyEnv = "NEUROLABEL_API_KEY";

struct ModelEndpoint {
  std::string base_url;
  std::optional<std::string> api_key;
  int timeout_ms = 120000;
  std::size_t max_in_flight = 4;
  RetryPolicy retry{3, 250};
  std::size_t max_payload_bytes = 32u << 20;

  /// Throws Error{configuration}.
  void validate() const;
};

struct PromptSeed {
  std::string text;
  std::uint64_t seed = 0;
};

/// JSON-over-HTTP client for the model bridge:
///   POST /v1/chat         {prompt, temperature, top_p, seed, max_tokens} -> {text}
///   POST /v1/images       {prompts:[{text, seed}], options:{}}           -> {images:[{b64, media_type}]}
///   POST /v1/activations  {images:[{b64, media_type}], layer, indices}   -> {activations:[[float]]}
///   POST /v1/edit         {image:{b64, media_type}, instruction}          -> {image:{b64, media_type}}
///   GET  /v1/health                                                      -> {roles:[...]}
/// Errors come back as {error:{code, message}} with a non-2xx status.
///
/// Transport failures and 408/429/5xx are retried under the endpoint's
/// policy; once attempts are spent the error is rethrown as non-retryable.
/// Concurrent calls are capped at max_in_flight.
class BridgeClient {
 public:
  explicit BridgeClient(ModelEndpoint endpoint, Sleeper sleeper = sleep_for);
  ~BridgeClient();
  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  std::string chat(const std::string& prompt, const ChatOptions& options);
  std::vector<Image> images(std::span<const PromptSeed> prompts, const std::string& options_json = "{}");
  std::vector<std::vector<double>> activations(std::span<const Image> images, const std::string& layer,
                                               std::span<const std::size_t> indices);
  Image edit(const Image& image, const std::string& instruction);
  std::vector<std::string> health();

  const ModelEndpoint& endpoint() const noexcept { return endpoint_; }

 private:
  std::string request(const std::string& method, const std::string& path, const std::string& body);

  struct Impl;
  ModelEndpoint endpoint_;
  Sleeper sleeper_;
  std::unique_ptr<Impl> impl_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws Error{protocol} on invalid input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

class BridgeLlm final : public LlmProvider {
 public:
  explicit BridgeLlm(BridgeClient& client) : client_(client) {}
  std::string chat(const std::string& prompt, const ChatOptions& options) override {
    return client_.chat(prompt, options);
  }

 private:
  BridgeClient& client_;
};

class BridgeT2i final : public T2iProvider {
 public:
  explicit BridgeT2i(BridgeClient& client, std::string options_json = "{}")
      : client_(client), options_json_(std::move(options_json)) {}
  std::vector<Image> generate(std::span<const PromptSpec> prompts) override;

 private:
  BridgeClient& client_;
  std::string options_json_;
};

class BridgeVision final : public VisionProvider {
 public:
  explicit BridgeVision(BridgeClient& client) : client_(client) {}
  std::vector<std::vector<double>> activations(std::span<const Image> images, const std::string& layer,
                                               std::span<const std::size_t> indices) override {
    return client_.activations(images, layer, indices);
  }

 private:
  BridgeClient& client_;
};

class BridgeEditor final : public EditProvider {
 public:
  explicit BridgeEditor(BridgeClient& client) : client_(client) {}
  Image edit(const Image& image, const std::string& instruction) override {
    return client_.edit(image, instruction);
  }

 private:
  BridgeClient& client_;
};

}  // namespace nlab
