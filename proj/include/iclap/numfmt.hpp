#pragma once

#include <string>
#include <string_view>

namespace iclap {

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

// Parses a complete token as a double. Returns false on any trailing garbage.
bool parse_double(std::string_view token, double& out);

bool parse_int(std::string_view token, long long& out);

}  // namespace iclap
