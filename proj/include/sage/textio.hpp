#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sage {

/// Shortest round-trip decimal form of a double (locale-independent,
/// deterministic). NaN and infinities print as "nan", "inf", "-inf".
std::string format_double(double value);

/// Strict full-string parses; throw ConfigError with `context` on failure.
double parse_double(std::string_view text, const std::string& context);
std::int64_t parse_int(std::string_view text, const std::string& context);
std::uint64_t parse_uint(std::string_view text, const std::string& context);
bool parse_bool(std::string_view text, const std::string& context);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace sage
