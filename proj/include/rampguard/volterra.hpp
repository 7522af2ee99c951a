#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rampguard {

using Kernel = std::function<double(double x, double z)>;

/// out[i] = f[i] - sum over the trapezoid rule of K(x_i, z) g(z) on [x_i, L].
/// Nodes are uniform with spacing dx starting at 0.
std::vector<double> volterra_subtract(std::span<const double> f, std::span<const double> g,
                                      const Kernel& kernel, double dx);

/// Trapezoid rule over uniform nodes.
double trapezoid(std::span<const double> values, double dx);

}  // namespace rampguard
