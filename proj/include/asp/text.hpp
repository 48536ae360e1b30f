#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "asp/errors.hpp"

// Small text helpers shared by the distribution, cost and config grammars.
namespace asp::text {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline double parse_double(std::string_view token) {
  token = trim(token);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError("expected a number", std::string(token));
  }
  return value;
}

inline std::uint64_t parse_count(std::string_view token) {
  token = trim(token);
  std::uint64_t value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError("expected a nonnegative integer", std::string(token));
  }
  return value;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Splits "name(a,b,c)" into name and argument list; a bare "name" has no args.
struct Call {
  std::string_view name;
  std::vector<std::string_view> args;
  bool has_parens = false;
};

inline Call parse_call(std::string_view spec) {
  spec = trim(spec);
  Call call;
  const auto open = spec.find('(');
  if (open == std::string_view::npos) {
    call.name = spec;
    return call;
  }
  if (spec.back() != ')') throw ParseError("missing closing parenthesis", std::string(spec));
  call.name = trim(spec.substr(0, open));
  call.has_parens = true;
  const auto inner = spec.substr(open + 1, spec.size() - open - 2);
  if (!trim(inner).empty()) call.args = split(inner, ',');
  return call;
}

// FNV-1a, used to fingerprint configs in CSV metadata.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace asp::text
