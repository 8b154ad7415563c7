#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace morphmt {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
/// `%.<digits>g` style formatting.
std::string format_significant(double v, int digits);
double parse_double(std::string_view text, std::size_t position = 0);

/// Splits on a literal separator and trims surrounding whitespace of each field.
std::vector<std::string> split_fields(std::string_view line, std::string_view sep);
std::string trim(std::string_view s);

std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

/// UTF-8 to code points; invalid bytes map to U+FFFD.
std::u32string utf8_decode(std::string_view s);

}  // namespace morphmt
