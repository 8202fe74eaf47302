// Copyright (c) 2026 The qekit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QEKIT_NUMERICS_HPP
#define QEKIT_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace qekit {

/// Trapezoidal integral over an arbitrary monotonic grid.
double trapz(const std::vector<double>& x, const std::vector<double>& y);

/// Linear interpolation on a sorted grid; clamps outside the range when
/// `clamp_ends` is true, otherwise returns 0 outside.
double interp_linear(const std::vector<double>& x, const std::vector<double>& y,
                     double q, bool clamp_ends = true);

/// Scaled exponentially weighted complementary error function
/// erfcx(x) = exp(x^2) * erfc(x), stable for large positive x.
double erfcx(double x);

/// Median of a copy of `v` (empty input returns NaN).
double median(std::vector<double> v);

/// Median absolute deviation scaled by 1.4826 so it estimates the standard
/// deviation of Gaussian data.
double mad_sigma(const std::vector<double>& v);

/// Density sampled on a uniform lattice x_i = x0 + i * step.
struct LatticeFn {
  double x0 = 0.0;
  double step = 1.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x0 + step * static_cast<double>(i); }
  double x_back() const { return x(values.empty() ? 0 : values.size() - 1); }

  /// Rectangle-rule integral; equals the trapezoidal one when the end
  /// values vanish.
  double integral() const;

  /// Value of the piecewise-linear interpolant at q (0 outside the lattice).
  double at(double q) const;
};

/// Convolution of two piecewise-linear densities on lattices with a common
/// step.  Output node k carries the exact integral
///   (f*g)(x_k) = \int f(x) g(x_k - x) dx
/// of the two interpolants, which for hat-function products reduces to the
/// plain discrete convolution filtered by [1/6, 2/3, 1/6].  The kernel sums
/// to one, so rectangle-rule mass is preserved exactly.
LatticeFn conv_lattice(const LatticeFn& f, const LatticeFn& g);

}  // namespace qekit

#endif  // QEKIT_NUMERICS_HPP
