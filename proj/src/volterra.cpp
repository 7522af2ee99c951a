#include "rampguard/volterra.hpp"

#include <cstddef>

#include "rampguard/error.hpp"

namespace rampguard {

std::vector<double> volterra_subtract(std::span<const double> f, std::span<const double> g,
                                      const Kernel& kernel, double dx) {
  if (f.size() != g.size())
    throw Error(ErrorCategory::domain, "volterra operands must share the mesh");
  const std::size_t n = f.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) * dx;
    double acc = 0.0;
    for (std::size_t k = i; k < n; ++k) {
      const double w = (k == i || k + 1 == n) ? 0.5 : 1.0;
      acc += w * kernel(x, static_cast<double>(k) * dx) * g[k];
    }
    out[i] = f[i] - (i + 1 == n ? 0.0 : acc * dx);
  }
  return out;
}

double trapezoid(std::span<const double> values, double dx) {
  if (values.size() < 2) return 0.0;
  double acc = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
  return acc * dx;
}

}  // namespace rampguard
