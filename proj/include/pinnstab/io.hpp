#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pinnstab {

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

/// Fixed 17-significant-digit decimal.
std::string format_double17(double x);

}  // namespace pinnstab
