#ifndef FIBERSTRAIN_FORMAT_HPP
#define FIBERSTRAIN_FORMAT_HPP

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "fiberstrain/error.hpp"

namespace fiberstrain {

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_FORMAT_HPP
