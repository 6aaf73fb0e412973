#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace metaphor {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool is_ascii_space(char c);

// Maximal runs of non-whitespace bytes.
std::vector<std::string_view> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
void replace_all(std::string& s, std::string_view from, std::string_view to);

// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t utf8_length(std::string_view s);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

}  // namespace metaphor
