#include "tabsynth/format.hpp"

#include <cmath>
#include <cstdio>

namespace tabsynth {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_metric(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return format_g17(v);
}

}  // namespace tabsynth
