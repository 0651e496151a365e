#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nlab {

inline constexpr const char* kEmbeddingMediaType = "application/x-embedding-f64le";

/// An image handle. Real images carry encoded bytes (PNG/JPEG); simulated
/// images carry an embedding vector instead.
struct Image {
  std::string id;
  std::string media_type;
  std::vector<std::uint8_t> bytes;
  std::vector<double> embedding;
};

/// Sniffs PNG/JPEG/WebP magic numbers; empty string if unrecognised.
std::string detect_image_media_type(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_embedding(const std::vector<double>& embedding);
std::vector<double> decode_embedding(const std::vector<std::uint8_t>& bytes);

}  // namespace nlab
