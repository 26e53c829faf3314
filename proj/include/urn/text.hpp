#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace urn
{

// Parses "key = value" lines; '#' starts a comment, blank lines and
// "[section]" headers are skipped. Keys are returned in file order.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

double parse_double(std::string_view key, std::string_view value);
std::int64_t parse_int(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);
std::vector<int> parse_int_list(std::string_view key, std::string_view value);
std::vector<double> parse_double_list(std::string_view key, std::string_view value);

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

std::string read_file(std::string const& path);

}  // namespace urn
