#include "neurolabel/io.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json_util.hpp"
#include "neurolabel/error.hpp"
#include "neurolabel/rng.hpp"

namespace nlab {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<std::uint64_t> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += fmt::format(".tmp{}", counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, fmt::format("cannot write '{}'", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::io, fmt::format("short write to '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

nlohmann::json parse_json(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(Errc::io, fmt::format("malformed {} JSON: {}", what, ex.what()));
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_file(path), path.string());
}

}  // namespace detail
}  // namespace nlab
