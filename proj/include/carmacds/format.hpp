#pragma once

#include <cstdio>
#include <string>

namespace carmacds {

// Full-precision numeric formatting used for every emitted number, so reruns
// are byte-identical.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace carmacds
