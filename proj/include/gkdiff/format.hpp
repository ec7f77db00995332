#pragma once

#include <cstdio>
#include <string>

namespace gkdiff {

/// Round-trip decimal representation, stable across runs.
inline std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace gkdiff
