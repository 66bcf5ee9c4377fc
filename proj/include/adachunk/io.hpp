#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adachunk {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Fixed-precision decimal rendering used by every CSV/report writer.
std::string format_fixed(double x, int precision = 6);

// Shortest decimal that parses back to exactly x.
std::string format_exact(double x);

// Minimal RFC 4180 CSV: fields containing separators or quotes are quoted.
std::string csv_field(std::string_view s);
std::string csv_row(const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace adachunk
