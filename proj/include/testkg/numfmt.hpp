#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace testkg::numfmt {

/// Shortest decimal form that round-trips through strtod. Used everywhere a
/// double becomes file content, so output is byte-stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

/// Parses iff the whole string is one finite number.
inline std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string owned(text);
  char* end = nullptr;
  double v = std::strtod(owned.c_str(), &end);
  if (end != owned.c_str() + owned.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace testkg::numfmt
