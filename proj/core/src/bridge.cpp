#include "neurolabel/bridge.hpp"

#include <array>
#include <cstdlib>
#include <mutex>
#include <semaphore>

#include <fmt/format.h>
#include <httplib.h>

#include <json.hpp>

namespace nlab {

namespace {

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

using nlohmann::json;

json image_to_json(const Image& image) {
  if (image.bytes.empty()) throw Error(Errc::protocol, fmt::format("image '{}' has no encoded bytes", image.id));
  return json{{"b64", base64_encode(image.bytes)}, {"media_type", image.media_type}};
}

Image image_from_json(const json& j, std::string id) {
  if (!j.is_object() || !j.contains("b64") || !j["b64"].is_string())
    throw Error(Errc::protocol, "image payload lacks 'b64'");
  Image image;
  image.id = std::move(id);
  image.bytes = base64_decode(j["b64"].get<std::string>());
  const auto sniffed = detect_image_media_type(image.bytes);
  if (sniffed.empty()) throw Error(Errc::protocol, fmt::format("payload for '{}' is not a recognised image", image.id));
  image.media_type = sniffed;
  return image;
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

std::string error_message(const std::string& body) {
  try {
    const auto j = json::parse(body);
    if (j.contains("error") && j["error"].is_object()) {
      const auto& e = j["error"];
      return fmt::format("{}: {}", e.value("code", std::string("error")), e.value("message", std::string()));
    }
  } catch (const json::exception&) {
  }
  return excerpt(body);
}

json parse_reply(const std::string& body, std::string_view what) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& ex) {
    throw Error(Errc::protocol, fmt::format("malformed {}: {}", what, ex.what()));
  }
}

// Invalid UTF-8 in caller text is replaced rather than aborting the request.
std::string dump_body(const json& body) { return body.dump(-1, ' ', false, json::error_handler_t::replace); }

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int k = 0; k < 64; ++k) t[static_cast<unsigned char>(kB64[k])] = k;
    return t;
  }();
  if (text.size() % 4 != 0) throw Error(Errc::protocol, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) throw Error(Errc::protocol, "misplaced base64 padding");
        v[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw Error(Errc::protocol, "misplaced base64 padding");
        v[k] = table[static_cast<unsigned char>(c)];
        if (v[k] < 0) throw Error(Errc::protocol, "invalid base64 character");
      }
    }
    const std::uint32_t w = (std::uint32_t(v[0]) << 18) | (std::uint32_t(v[1]) << 12) | (std::uint32_t(v[2]) << 6) |
                            std::uint32_t(v[3]);
    out.push_back(static_cast<std::uint8_t>(w >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((w >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(w & 0xff));
  }
  return out;
}

void ModelEndpoint::validate() const {
  if (base_url.empty()) throw Error(Errc::configuration, "bridge endpoint base_url is empty");
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
    throw Error(Errc::configuration, fmt::format("bridge endpoint '{}' must start with http:// or https://", base_url));
  if (timeout_ms <= 0) throw Error(Errc::configuration, "bridge timeout_ms must be positive");
  if (max_in_flight == 0) throw Error(Errc::configuration, "bridge max_in_flight must be at least 1");
  if (max_payload_bytes == 0) throw Error(Errc::configuration, "bridge max_payload_bytes must be positive");
}

struct BridgeClient::Impl {
  explicit Impl(std::size_t slots) : gate(static_cast<std::ptrdiff_t>(slots)) {}
  std::counting_semaphore<1024> gate;
};

BridgeClient::BridgeClient(ModelEndpoint endpoint, Sleeper sleeper)
    : endpoint_(std::move(endpoint)), sleeper_(std::move(sleeper)) {
  endpoint_.validate();
  if (endpoint_.max_in_flight > 1024) endpoint_.max_in_flight = 1024;
  if (!endpoint_.api_key) {
    if (const char* key = std::getenv(kApiKeyEnv); key && *key) endpoint_.api_key = key;
  }
  impl_ = std::make_unique<Impl>(endpoint_.max_in_flight);
}

BridgeClient::~BridgeClient() = default;

std::string BridgeClient::request(const std::string& method, const std::string& path, const std::string& body) {
  if (body.size() > endpoint_.max_payload_bytes)
    throw Error(Errc::payload_too_large,
                fmt::format("{} request is {} bytes, limit {}", path, body.size(), endpoint_.max_payload_bytes));

  auto once = [&]() -> std::string {
    impl_->gate.acquire();
    struct Release {
      std::counting_semaphore<1024>& g;
      ~Release() { g.release(); }
    } release{impl_->gate};

    httplib::Client client(endpoint_.base_url);
    const auto secs = endpoint_.timeout_ms / 1000;
    const auto usecs = (endpoint_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (endpoint_.api_key) headers.emplace("Authorization", "Bearer " + *endpoint_.api_key);

    auto res = method == "GET" ? client.Get(path, headers) : client.Post(path, headers, body, "application/json");
    if (!res)
      throw ProviderError(fmt::format("{} {}: transport error: {}", method, path, httplib::to_string(res.error())), 0,
                          true);
    const int status = res->status;
    if (status >= 200 && status < 300) return res->body;
    if (status == 413)
      throw Error(Errc::payload_too_large, fmt::format("{} {}: {}", method, path, error_message(res->body)));
    throw ProviderError(fmt::format("{} {} returned {}: {}", method, path, status, error_message(res->body)), status,
                        retryable_status(status));
  };

  try {
    return with_retry(endpoint_.retry, once, sleeper_);
  } catch (const ProviderError& err) {
    if (!err.retryable()) throw;
    throw ProviderError(fmt::format("{} (after {} attempts)", err.what(), endpoint_.retry.attempts), err.status(),
                        false);
  }
}

std::string BridgeClient::chat(const std::string& prompt, const ChatOptions& options) {
  json body{{"prompt", prompt},
            {"temperature", options.temperature},
            {"top_p", options.top_p},
            {"max_tokens", options.max_tokens}};
  body["seed"] = options.seed ? json(*options.seed) : json(nullptr);
  const auto reply = parse_reply(request("POST", "/v1/chat", dump_body(body)), "chat response");
  if (!reply.contains("text") || !reply["text"].is_string())
    throw Error(Errc::protocol, "chat response lacks string field 'text'");
  return reply["text"].get<std::string>();
}

std::vector<Image> BridgeClient::images(std::span<const PromptSeed> prompts, const std::string& options_json) {
  json list = json::array();
  for (const auto& p : prompts) list.push_back(json{{"text", p.text}, {"seed", p.seed}});
  json options;
  try {
    options = json::parse(options_json.empty() ? "{}" : options_json);
  } catch (const json::parse_error& ex) {
    throw Error(Errc::configuration, fmt::format("t2i options are not valid JSON: {}", ex.what()));
  }
  if (!options.is_object()) throw Error(Errc::configuration, "t2i options must be a JSON object");
  json body{{"prompts", std::move(list)}, {"options", std::move(options)}};
  const auto reply = parse_reply(request("POST", "/v1/images", dump_body(body)), "images response");
  if (!reply.contains("images") || !reply["images"].is_array())
    throw Error(Errc::protocol, "images response lacks array field 'images'");
  const auto& arr = reply["images"];
  if (arr.size() != prompts.size())
    throw Error(Errc::protocol, fmt::format("images response has {} images for {} prompts", arr.size(), prompts.size()));
  std::vector<Image> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(image_from_json(arr[i], fmt::format("bridge:{:016x}#{}", prompts[i].seed, i)));
  return out;
}

std::vector<std::vector<double>> BridgeClient::activations(std::span<const Image> images, const std::string& layer,
                                                           std::span<const std::size_t> indices) {
  if (images.empty()) throw Error(Errc::empty_activation, "activations request has no images");
  if (indices.empty()) throw Error(Errc::configuration, "activations request has no neuron indices");
  json imgs = json::array();
  for (const auto& image : images) imgs.push_back(image_to_json(image));
  json body{{"images", std::move(imgs)}, {"layer", layer}, {"indices", std::vector<std::size_t>(indices.begin(), indices.end())}};
  const auto reply = parse_reply(request("POST", "/v1/activations", dump_body(body)), "activations response");
  if (!reply.contains("activations") || !reply["activations"].is_array())
    throw Error(Errc::protocol, "activations response lacks array field 'activations'");
  const auto& rows = reply["activations"];
  if (rows.size() != images.size())
    throw Error(Errc::protocol, fmt::format("activations response has {} rows for {} images", rows.size(), images.size()));
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != indices.size())
      throw Error(Errc::protocol, fmt::format("activation row must hold {} values", indices.size()));
    std::vector<double> values;
    values.reserve(row.size());
    for (const auto& v : row) {
      if (!v.is_number()) throw Error(Errc::protocol, "activation value is not a number");
      values.push_back(v.get<double>());
    }
    out.push_back(std::move(values));
  }
  return out;
}

Image BridgeClient::edit(const Image& image, const std::string& instruction) {
  json body{{"image", image_to_json(image)}, {"instruction", instruction}};
  const auto reply = parse_reply(request("POST", "/v1/edit", dump_body(body)), "edit response");
  if (!reply.contains("image")) throw Error(Errc::protocol, "edit response lacks field 'image'");
  return image_from_json(reply["image"], image.id + "~edit");
}

std::vector<std::string> BridgeClient::health() {
  const auto reply = parse_reply(request("GET", "/v1/health", ""), "health response");
  if (!reply.contains("roles") || !reply["roles"].is_array())
    throw Error(Errc::protocol, "health response lacks array field 'roles'");
  std::vector<std::string> roles;
  for (const auto& r : reply["roles"]) {
    if (!r.is_string()) throw Error(Errc::protocol, "health roles must be strings");
    roles.push_back(r.get<std::string>());
  }
  return roles;
}

std::vector<Image> BridgeT2i::generate(std::span<const PromptSpec> prompts) {
  std::vector<PromptSeed> seeds;
  seeds.reserve(prompts.size());
  for (const auto& p : prompts) seeds.push_back({p.rendered, p.seed});
  auto images = client_.images(seeds, options_json_);
  for (std::size_t i = 0; i < images.size(); ++i)
    images[i].id = fmt::format("bridge:{}#{:016x}", prompts[i].concept_label.text(), prompts[i].seed);
  return images;
}

}  // namespace nlab
