#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace weier {

// Shortest decimal form that parses back to the same double.
std::string fmt(double v);
std::string fmt(long long v);
inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(long v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(unsigned long v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(unsigned long long v) { return fmt(static_cast<long long>(v)); }

double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace weier
