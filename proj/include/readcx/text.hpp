#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace readcx::text {

/// Number of Unicode scalar values in a UTF-8 string. Throws a Value error
/// on invalid UTF-8.
std::size_t utf8_length(std::string_view s);

/// Simple (per code point, locale-independent) Unicode lowercasing.
std::string lowercase(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string_view trim(std::string_view s);

/// Parses a finite double occupying the whole field.
bool parse_double(std::string_view field, double& out);
bool parse_int(std::string_view field, long long& out);

/// Shortest round-trippable rendering of a double ("%.17g" trimmed).
std::string format_double(double v);
/// Rendering with `digits` significant digits ("%.{digits}g").
std::string format_double(double v, int digits);

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a(std::string_view s);

}  // namespace readcx::text
