#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace seqpred {

// Shortest decimal string that parses back to the same double. Keeps report
// files byte-stable across runs and platforms with the same FP behavior.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace seqpred
