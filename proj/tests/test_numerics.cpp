#include <cmath>
#include <vector>

#include "doctest.h"
#include "qekit/numerics.hpp"

using qekit::LatticeFn;

TEST_CASE("trapezoid integral on a non-uniform grid") {
  std::vector<double> x{0.0, 1.0, 3.0, 4.0};
  std::vector<double> y{0.0, 2.0, 2.0, 0.0};
  CHECK(qekit::trapz(x, y) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("linear interpolation clamps or zeroes outside the grid") {
  std::vector<double> x{1.0, 2.0, 4.0};
  std::vector<double> y{10.0, 20.0, 0.0};
  CHECK(qekit::interp_linear(x, y, 1.5) == doctest::Approx(15.0));
  CHECK(qekit::interp_linear(x, y, 3.0) == doctest::Approx(10.0));
  CHECK(qekit::interp_linear(x, y, 0.0, true) == doctest::Approx(10.0));
  CHECK(qekit::interp_linear(x, y, 0.0, false) == 0.0);
  CHECK(qekit::interp_linear(x, y, 5.0, false) == 0.0);
}

TEST_CASE("median and scaled MAD") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0, 100.0};
  CHECK(qekit::median(v) == doctest::Approx(3.0));
  std::vector<double> even{1.0, 2.0, 3.0, 10.0};
  CHECK(qekit::median(even) == doctest::Approx(2.5));
  // abs deviations from 3: {2,1,0,1,97} -> median 1 -> scaled 1.4826
  CHECK(qekit::mad_sigma(v) == doctest::Approx(1.4826).epsilon(1e-12));
}

TEST_CASE("erfcx matches exp(x^2) erfc(x) and is smooth at the crossover") {
  // libm erfc keeps full relative precision only while the result is O(1),
  // so the direct reference is used below the branch point and independently
  // computed 17-digit values above it.
  for (double x : {0.0, 0.3, 1.0, 1.9}) {
    double ref = std::exp(x * x) * std::erfc(x);
    CHECK(qekit::erfcx(x) == doctest::Approx(ref).epsilon(1e-13));
  }
  CHECK(qekit::erfcx(2.5) ==
        doctest::Approx(0.21080636406114358).epsilon(1e-14));
  CHECK(qekit::erfcx(5.0) ==
        doctest::Approx(0.11070463773306863).epsilon(1e-14));
  CHECK(qekit::erfcx(6.5) ==
        doctest::Approx(0.085805670104894602).epsilon(1e-14));
  CHECK(qekit::erfcx(12.0) ==
        doctest::Approx(0.046854221014893763).epsilon(1e-14));
  CHECK(qekit::erfcx(100.0) ==
        doctest::Approx(0.0056416137829894329).epsilon(1e-14));
  // reflection identity for moderate negatives
  for (double x : {0.5, 1.5, 3.0}) {
    double ref = 2.0 * std::exp(x * x) - qekit::erfcx(x);
    CHECK(qekit::erfcx(-x) == doctest::Approx(ref).epsilon(1e-13));
  }
  // adjacent doubles across the branch point
  double below = qekit::erfcx(std::nextafter(2.0, 0.0));
  double above = qekit::erfcx(2.0);
  CHECK(std::fabs(below - above) / above < 5e-15);
  // large-argument asymptote ~ 1/(x sqrt(pi))
  CHECK(qekit::erfcx(1e4) ==
        doctest::Approx(1.0 / (1e4 * std::sqrt(M_PI))).epsilon(1e-7));
}

namespace {

LatticeFn unit_mass_boxcar(double h, double a, double b) {
  // Half-value endpoints make the piecewise-linear representation carry the
  // same mass and edge centroid as the ideal boxcar.
  LatticeFn f;
  f.step = h;
  f.x0 = a - h;
  int n = static_cast<int>(std::lround((b - a) / h)) + 3;
  f.values.assign(n, 0.0);
  double c = 1.0 / (b - a);
  for (int i = 1; i < n - 1; ++i) f.values[i] = c;
  f.values[1] = 0.5 * c;
  f.values[n - 2] = 0.5 * c;
  return f;
}

}  // namespace

TEST_CASE("convolution of two boxcars is the analytic triangle") {
  const double h = 0.5, a = 2.0, b = 6.0;
  LatticeFn f = unit_mass_boxcar(h, a, b);
  CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-14));

  LatticeFn out = qekit::conv_lattice(f, f);
  CHECK(out.integral() == doctest::Approx(1.0).epsilon(1e-12));

  const double c = 1.0 / (b - a);
  auto triangle = [&](double x) {
    double d = (b - a) - std::fabs(x - (a + b));
    return d > 0.0 ? c * c * d : 0.0;
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    double x = out.x(i);
    // Away from the three kinks the node values are exact.
    double dk = std::min({std::fabs(x - 2 * a), std::fabs(x - (a + b)),
                          std::fabs(x - 2 * b)});
    if (dk >= 2.0 * h)
      CHECK(out.values[i] == doctest::Approx(triangle(x)).epsilon(1e-12));
    else
      CHECK(std::fabs(out.values[i] - triangle(x)) <= c * c * h);
  }
}

TEST_CASE("convolution of delta cells shifts the position") {
  const double h = 0.25, e0 = 3.0;
  LatticeFn d;
  d.step = h;
  d.x0 = e0 - h;
  d.values = {0.0, 1.0 / h, 0.0};
  CHECK(d.integral() == doctest::Approx(1.0));

  LatticeFn out = qekit::conv_lattice(d, d);
  CHECK(out.integral() == doctest::Approx(1.0).epsilon(1e-12));
  std::size_t peak = 0;
  double outside = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.values[i] > out.values[peak]) peak = i;
    if (std::fabs(out.x(i) - 2.0 * e0) > 2.0 * h) outside += out.values[i];
  }
  CHECK(out.x(peak) == doctest::Approx(2.0 * e0).epsilon(1e-14));
  CHECK(outside == 0.0);
}

TEST_CASE("convolution preserves the product of masses") {
  LatticeFn f, g;
  f.step = g.step = 0.2;
  f.x0 = -1.0;
  g.x0 = 0.4;
  f.values = {0.0, 0.3, 1.1, 0.2, 0.9, 0.0};
  g.values = {0.0, 2.0, 0.5, 1.5, 0.0};
  LatticeFn out = qekit::conv_lattice(f, g);
  CHECK(out.integral() ==
        doctest::Approx(f.integral() * g.integral()).epsilon(1e-13));
  CHECK(out.x0 == doctest::Approx(f.x0 + g.x0 - f.step));
}
