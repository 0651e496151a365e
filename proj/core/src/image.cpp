#include "neurolabel/image.hpp"

#include <bit>
#include <cstring>

#include "neurolabel/error.hpp"

namespace nlab {

std::string detect_image_media_type(const std::vector<std::uint8_t>& b) {
  if (b.size() >= 8 && b[0] == 0x89 && b[1] == 'P' && b[2] == 'N' && b[3] == 'G' && b[4] == 0x0D &&
      b[5] == 0x0A && b[6] == 0x1A && b[7] == 0x0A) {
    return "image/png";
  }
  if (b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF) return "image/jpeg";
  if (b.size() >= 12 && std::memcmp(b.data(), "RIFF", 4) == 0 &&
      std::memcmp(b.data() + 8, "WEBP", 4) == 0) {
    return "image/webp";
  }
  return {};
}

std::vector<std::uint8_t> encode_embedding(const std::vector<double>& embedding) {
  std::vector<std::uint8_t> out;
  out.reserve(embedding.size() * 8);
  for (double x : embedding) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  return out;
}

std::vector<double> decode_embedding(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 8 != 0) throw Error(Errc::protocol, "embedding payload is not a multiple of 8 bytes");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[k * 8 + i]) << (8 * i);
    out[k] = std::bit_cast<double>(bits);
  }
  return out;
}

}  // namespace nlab
