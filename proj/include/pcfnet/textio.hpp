#pragma once
// Small text helpers shared by the CSV / model-file readers and writers.
// Doubles are printed with std::to_chars (shortest representation that
// round-trips exactly), so save -> load is value-exact and output files are
// byte-stable across runs.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "pcfnet/errors.hpp"

namespace pcfnet {

inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
  double out = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw DataError("bad floating-point value '" + std::string(text) + "' in " + context);
  }
  return out;
}

inline long long parse_int(std::string_view text, const std::string& context) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("bad integer value '" + std::string(text) + "' in " + context);
  }
  return out;
}

inline std::vector<std::string> split_on(std::string_view line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::string trim(std::string_view text) {
  std::size_t b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  std::size_t e = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(b, e - b + 1));
}

}  // namespace pcfnet
