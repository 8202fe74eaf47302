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

#include "qekit/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace qekit {

double trapz(const std::vector<double>& x, const std::vector<double>& y) {
  assert(x.size() == y.size());
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return acc;
}

double interp_linear(const std::vector<double>& x, const std::vector<double>& y,
                     double q, bool clamp_ends) {
  if (x.empty()) return 0.0;
  if (q <= x.front()) return clamp_ends ? y.front() : (q == x.front() ? y.front() : 0.0);
  if (q >= x.back()) return clamp_ends ? y.back() : (q == x.back() ? y.back() : 0.0);
  auto it = std::upper_bound(x.begin(), x.end(), q);
  std::size_t hi = static_cast<std::size_t>(it - x.begin());
  std::size_t lo = hi - 1;
  double t = (q - x[lo]) / (x[hi] - x[lo]);
  return (1.0 - t) * y[lo] + t * y[hi];
}

double erfcx(double x) {
  if (x < 0.0) {
    // erfcx(-x) = 2 exp(x^2) - erfcx(x); caller must keep x^2 in range.
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  // erfc keeps full relative precision only while its result is O(1); in the
  // far tail the libm value drifts by ~1e-8, so switch to the Laplace
  // continued fraction sqrt(pi) erfcx(x) = 1/(x+ (1/2)/(x+ 1/(x+ ...)))
  // evaluated with the modified Lentz scheme.
  if (x < 2.0) return std::exp(x * x) * std::erfc(x);
  const double tiny = 1e-300;
  double f = tiny, c = f, d = 0.0;
  for (int n = 0; n < 80; ++n) {
    const double a = n == 0 ? 1.0 : 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-17) break;
  }
  return f / std::sqrt(M_PI);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return 0.5 * (hi + v[mid - 1]);
}

double mad_sigma(const std::vector<double>& v) {
  double med = median(std::vector<double>(v));
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::fabs(v[i] - med);
  return 1.4826 * median(std::move(dev));
}

double LatticeFn::integral() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * step;
}

double LatticeFn::at(double q) const {
  if (values.empty()) return 0.0;
  double t = (q - x0) / step;
  if (t <= 0.0 || t >= static_cast<double>(values.size() - 1)) {
    if (t == 0.0) return values.front();
    if (t == static_cast<double>(values.size() - 1)) return values.back();
    return 0.0;
  }
  std::size_t i = static_cast<std::size_t>(t);
  double f = t - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

LatticeFn conv_lattice(const LatticeFn& f, const LatticeFn& g) {
  assert(std::fabs(f.step - g.step) < 1e-15 * std::max(f.step, g.step));
  const double h = f.step;
  const std::size_t nf = f.size(), ng = g.size();
  LatticeFn out;
  out.step = h;
  if (nf == 0 || ng == 0) return out;

  // Plain discrete convolution, then the exact piecewise-linear filter.
  // One guard node is added on each side for the filter taps.
  std::vector<double> raw(nf + ng - 1, 0.0);
  for (std::size_t i = 0; i < nf; ++i) {
    const double fi = f.values[i];
    if (fi == 0.0) continue;
    for (std::size_t j = 0; j < ng; ++j) raw[i + j] += fi * g.values[j];
  }
  out.x0 = f.x0 + g.x0 - h;
  out.values.assign(raw.size() + 2, 0.0);
  for (std::size_t k = 0; k < raw.size() + 2; ++k) {
    double c = 0.0;
    if (k >= 2 && k - 2 < raw.size()) c += raw[k - 2] / 6.0;
    if (k >= 1 && k - 1 < raw.size()) c += raw[k - 1] * (2.0 / 3.0);
    if (k < raw.size()) c += raw[k] / 6.0;
    out.values[k] = c * h;
  }
  return out;
}

}  // namespace qekit
