#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace nlab {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it into place so readers never
/// observe a partial file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace nlab
