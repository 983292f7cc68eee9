#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eitvent {

/// Writes `content` to `path` atomically (temp file in the same
/// directory, then rename). Parent directories are created on demand.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Splits one CSV line on commas. No quoting; trailing '\r' stripped.
std::vector<std::string> split_csv_line(std::string_view line);

std::string to_lower(std::string_view s);

/// Locale-independent double formatting with round-trip precision.
std::string format_double(double v);

double parse_double(std::string_view text, const std::string& context);
int parse_int(std::string_view text, const std::string& context);

}  // namespace eitvent
