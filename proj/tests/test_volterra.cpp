#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rampguard/detector_bank.hpp"
#include "rampguard/error.hpp"
#include "rampguard/volterra.hpp"

using namespace rampguard;

TEST(Volterra, TrapezoidMatchesAntiderivative) {
  // int_0^2 e^{-x} dx = 1 - e^{-2}
  for (int n : {50, 200}) {
    const double dx = 2.0 / n;
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) f[i] = std::exp(-i * dx);
    const double err = std::abs(trapezoid(f, dx) - (1.0 - std::exp(-2.0)));
    EXPECT_LT(err, 0.1 * dx * dx);
  }
  EXPECT_EQ(trapezoid(std::vector<double>{3.0}, 0.1), 0.0);
}

TEST(Volterra, ConstantInputAgainstClosedForm) {
  // f = g = 1 with the mode-1 forward R kernel: 1 - int_x^L R(x,z) dz = e^{h a (x - L)}
  const GlobalParams g;
  const DerivedConstants d = derive_mode_constants(find_mode(reference_modes(), 1), g);
  const double ha = d.h / d.tau_gp;
  std::vector<double> ones(g.n_nodes(), 1.0);
  const auto out = volterra_subtract(ones, ones, [&](double x, double z) {
    return kernels(d, x, z).r;
  }, g.dx());
  for (int i = 0; i < g.n_nodes(); ++i) {
    const double exact = std::exp(ha * (g.node(i) - g.length));
    EXPECT_NEAR(out[i], exact, ha * ha * ha * g.dx() * g.dx() * g.length / 12.0 * 1.01 + 1e-15);
  }
  EXPECT_DOUBLE_EQ(out.back(), 1.0);
}

TEST(Volterra, LinearInBothOperands) {
  const double dx = 0.1;
  std::vector<double> f1{1, 2, 3, 4}, f2{0.5, -1, 2, 0}, g1{1, 0, -1, 2}, g2{3, 3, 1, 0};
  const Kernel k = [](double x, double z) { return std::sin(x + 2 * z); };
  std::vector<double> fa(4), ga(4);
  for (int i = 0; i < 4; ++i) {
    fa[i] = 2 * f1[i] - 3 * f2[i];
    ga[i] = 2 * g1[i] - 3 * g2[i];
  }
  const auto a = volterra_subtract(fa, ga, k, dx);
  const auto b1 = volterra_subtract(f1, g1, k, dx);
  const auto b2 = volterra_subtract(f2, g2, k, dx);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a[i], 2 * b1[i] - 3 * b2[i], 1e-14);
}

TEST(Volterra, MeshMismatchRejected) {
  std::vector<double> f(4, 1.0), g(5, 1.0);
  EXPECT_THROW(volterra_subtract(f, g, [](double, double) { return 1.0; }, 0.1), Error);
}
