#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dynmap::text {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
// Lower-cased, trimmed, inner whitespace runs collapsed to one space.
std::string normalize(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace dynmap::text
