#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace opsgraph::io {

/// Throws Error("input not found: ...") when the file is missing.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace opsgraph::io
