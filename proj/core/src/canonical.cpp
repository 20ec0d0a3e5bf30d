#include "distillplan/canonical.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace distill {

double canonical_round(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace distill
