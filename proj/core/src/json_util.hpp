#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace nlab::detail {

inline std::string json_quote(std::string_view text) { return nlohmann::json(std::string(text)).dump(); }

nlohmann::json parse_json(std::string_view text, std::string_view what);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace nlab::detail
