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

#include "qekit/vibronic.hpp"

#include <algorithm>
#include <cmath>

#include "qekit/constants.hpp"
#include "qekit/errors.hpp"

namespace qekit::vibronic {

double bose_einstein(double e_ev, double t_k) {
  require(e_ev > 0.0 && std::isfinite(e_ev), Err::NonPositiveEnergy,
          "phonon energy must be positive");
  require(t_k > 0.0 && std::isfinite(t_k), Err::NonPositiveTemperature,
          "temperature must be positive");
  const double x = e_ev / (constants::k_boltzmann_ev_per_k * t_k);
  if (x > 700.0) return 0.0;
  return 1.0 / std::expm1(x);
}

void PhononSpectralFunction::validate() const {
  require(delta_e_ev > 0.0 && e_max_ev > 0.0, Err::NonPositiveEnergy,
          "grid step and range must be positive");
  require(!values.empty(), Err::EmptySpectralFunction,
          "spectral function has no grid cells");
  const double n = e_max_ev / delta_e_ev;
  require(std::fabs(n - std::round(n)) < 1e-9 &&
              std::llround(n) == static_cast<long long>(values.size()),
          Err::EmptySpectralFunction,
          "cell count must equal e_max / delta_e");
  bool any = false;
  for (double v : values) {
    require(v >= 0.0 && std::isfinite(v), Err::NonPositiveInput,
            "spectral density must be non-negative");
    any = any || v > 0.0;
  }
  require(any, Err::EmptySpectralFunction, "spectral function is all zero");
}

double PhononSpectralFunction::at(double e_ev) const {
  if (e_ev <= 0.0 || e_ev > e_max_ev) return 0.0;
  const double m0 = 0.5 * delta_e_ev;
  if (e_ev <= m0) return values.front() * (e_ev / m0);
  const double last_mid = midpoint(values.size() - 1);
  if (e_ev >= last_mid) return values.back();
  const double t = e_ev / delta_e_ev - 0.5;
  const std::size_t i = static_cast<std::size_t>(t);
  const double f = t - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

double PhononSpectralFunction::integral() const {
  // Exact for the piecewise-linear interpolant: triangle below the first
  // midpoint, trapezoids between midpoints, clamped tail to e_max.
  const double h = delta_e_ev;
  double acc = 0.5 * values.front() * (0.5 * h);
  for (std::size_t i = 1; i < values.size(); ++i)
    acc += 0.5 * (values[i - 1] + values[i]) * h;
  acc += values.back() * (0.5 * h);
  return acc;
}

PhononSpectralFunction PhononSpectralFunction::uniform(double delta_e_ev,
                                                       double e_max_ev,
                                                       double value) {
  PhononSpectralFunction p;
  p.delta_e_ev = delta_e_ev;
  p.e_max_ev = e_max_ev;
  p.values.assign(
      static_cast<std::size_t>(std::llround(e_max_ev / delta_e_ev)), value);
  p.validate();
  return p;
}

namespace {

// Shared by one_phonon and the fitter: the Bose-weighted (unnormalized)
// distribution and its lattice.
LatticeFn bose_weighted(const PhononSpectralFunction& psf, double t_k,
                        double step_ev) {
  psf.validate();
  require(t_k > 0.0 && std::isfinite(t_k), Err::NonPositiveTemperature,
          "temperature must be positive");
  double h = step_ev > 0.0 ? step_ev : 0.5 * psf.delta_e_ev;
  const long long n_side = std::max(1ll, std::llround(psf.e_max_ev / h));
  h = psf.e_max_ev / static_cast<double>(n_side);

  LatticeFn w;
  w.step = h;
  w.x0 = -(psf.e_max_ev + h);
  w.values.assign(static_cast<std::size_t>(2 * (n_side + 1) + 1), 0.0);
  const long long center = n_side + 1;
  for (long long i = -n_side; i <= n_side; ++i) {
    double x = static_cast<double>(i) * h;
    double v;
    if (i == 0) {
      // Continuity limit: both branches approach kB T dS/dE(0+).
      double slope0 = psf.values.front() / (0.5 * psf.delta_e_ev);
      v = constants::k_boltzmann_ev_per_k * t_k * slope0;
    } else {
      double s = psf.at(std::fabs(x));
      if (s == 0.0) {
        v = 0.0;
      } else {
        double n = bose_einstein(std::fabs(x), t_k);
        v = (x > 0.0 ? n + 1.0 : n) * s;
      }
    }
    w.values[static_cast<std::size_t>(center + i)] = v;
  }
  return w;
}

}  // namespace

LatticeFn one_phonon(const PhononSpectralFunction& psf, double t_k,
                     double step_ev) {
  LatticeFn w = bose_weighted(psf, t_k, step_ev);
  double z = w.integral();
  require(z > 0.0, Err::EmptySpectralFunction,
          "Bose-weighted spectral function has zero mass");
  for (double& v : w.values) v /= z;
  return w;
}

double one_phonon_normalization(const PhononSpectralFunction& psf, double t_k,
                                double step_ev) {
  double z = bose_weighted(psf, t_k, step_ev).integral();
  require(z > 0.0, Err::EmptySpectralFunction,
          "Bose-weighted spectral function has zero mass");
  return 1.0 / z;
}

LatticeFn n_phonon(const LatticeFn& i1, int n) {
  require(n >= 1, Err::NonPositiveInput, "phonon order must be >= 1");
  LatticeFn out = i1;
  for (int k = 2; k <= n; ++k) out = conv_lattice(out, i1);
  return out;
}

int auto_n_max(double s_hr, double tail_tol, int cap) {
  require(s_hr >= 0.0, Err::NegativeHuangRhys,
          "Huang-Rhys factor must be non-negative");
  double term = std::exp(-s_hr);  // n = 0
  double cum = term;
  int n = 0;
  while (cum < 1.0 - tail_tol && n < cap) {
    ++n;
    term *= s_hr / n;
    cum += term;
  }
  return std::max(n, 1);
}

std::vector<double> poisson_weights(double s_hr, int n_max) {
  require(s_hr >= 0.0, Err::NegativeHuangRhys,
          "Huang-Rhys factor must be non-negative");
  std::vector<double> w(static_cast<std::size_t>(n_max));
  double term = std::exp(-s_hr);
  for (int n = 1; n <= n_max; ++n) {
    term *= s_hr / n;
    w[static_cast<std::size_t>(n - 1)] = term;
  }
  return w;
}

namespace {

// Adds w * term into acc, assuming both lattices share the step and are
// offset by an integer number of cells.
void accumulate(LatticeFn& acc, const LatticeFn& term, double w) {
  const long long off = std::llround((term.x0 - acc.x0) / acc.step);
  for (std::size_t i = 0; i < term.size(); ++i) {
    long long j = off + static_cast<long long>(i);
    if (j >= 0 && j < static_cast<long long>(acc.size()))
      acc.values[static_cast<std::size_t>(j)] += w * term.values[i];
  }
}

}  // namespace

LatticeFn psb(const LatticeFn& i1, double s_hr, int n_max) {
  require(n_max >= 1, Err::NonPositiveInput, "n_max must be >= 1");
  std::vector<double> w = poisson_weights(s_hr, n_max);
  if (s_hr == 0.0) {
    LatticeFn zero = i1;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    return zero;
  }
  // Ladder up to n_max, accumulating on the widest lattice.
  std::vector<LatticeFn> ladder;
  ladder.reserve(static_cast<std::size_t>(n_max));
  ladder.push_back(i1);
  for (int n = 2; n <= n_max; ++n)
    ladder.push_back(conv_lattice(ladder.back(), i1));
  LatticeFn out = ladder.back();
  std::fill(out.values.begin(), out.values.end(), 0.0);
  for (int n = 1; n <= n_max; ++n)
    accumulate(out, ladder[static_cast<std::size_t>(n - 1)],
               w[static_cast<std::size_t>(n - 1)]);
  return out;
}

std::vector<double> convolve_profile(const LatticeFn& dist,
                                     const LineProfile& prof, double q0,
                                     double step, std::size_t n_out) {
  require(step > 0.0 && n_out > 0, Err::NonPositiveInput,
          "output grid must be non-empty with positive step");
  const long long k = std::llround(dist.step / step);
  require(k >= 1 && std::fabs(k * step - dist.step) < 1e-9 * dist.step,
          Err::NonPositiveInput, "output step must divide the lattice step");

  const std::size_t m = dist.size();
  std::vector<double> acc(n_out, 0.0);
  if (m < 2) return acc;

  const double h = dist.step;
  // Segment slopes and intercepts relative to the segment's left node.
  // Per-edge regrouping: sum_e (A_e + q B_e) F(q - x_e) - B_e G(q - x_e).
  std::vector<double> beta(m, 0.0);  // beta[e] = slope of segment e (e < m-1)
  for (std::size_t e = 0; e + 1 < m; ++e)
    beta[e] = (dist.values[e + 1] - dist.values[e]) / h;

  // Lag tables: q_i - x_e = offset + (i - e k) * step.
  const double offset = q0 - dist.x0;
  const long long m0 = std::llround(offset / step);
  const double resid = offset - static_cast<double>(m0) * step;
  const long long lag_min = m0 - static_cast<long long>(m - 1) * k;
  const long long lag_max = m0 + static_cast<long long>(n_out) - 1;
  const std::size_t n_lag = static_cast<std::size_t>(lag_max - lag_min + 1);
  std::vector<double> f_tab(n_lag), g_tab(n_lag);
  for (std::size_t l = 0; l < n_lag; ++l) {
    double u = resid + static_cast<double>(lag_min + static_cast<long long>(l)) * step;
    f_tab[l] = prof.cdf(u);
    g_tab[l] = prof.moment1(u);
  }

  std::vector<double> qs(n_out);
  for (std::size_t i = 0; i < n_out; ++i)
    qs[i] = q0 + static_cast<double>(i) * step;

  for (std::size_t e = 0; e < m; ++e) {
    const double x_e = dist.x0 + static_cast<double>(e) * h;
    const double beta_left = e > 0 ? beta[e - 1] : 0.0;
    const double beta_right = e + 1 < m ? beta[e] : 0.0;
    const double alpha_left =
        e > 0 ? dist.values[e - 1] - beta_left * (x_e - h) : 0.0;
    const double alpha_right = dist.values[e] - beta_right * x_e;
    const double a_e = alpha_right - alpha_left;
    const double b_e = beta_right - beta_left;
    if (a_e == 0.0 && b_e == 0.0) continue;
    const std::size_t base =
        static_cast<std::size_t>(m0 - static_cast<long long>(e) * k - lag_min);
    const double* ft = f_tab.data() + base;
    const double* gt = g_tab.data() + base;
    for (std::size_t i = 0; i < n_out; ++i)
      acc[i] += (a_e + qs[i] * b_e) * ft[i] - b_e * gt[i];
  }
  return acc;
}

std::vector<double> convolve_profile_at(const LatticeFn& dist,
                                        const LineProfile& prof,
                                        const std::vector<double>& q) {
  const std::size_t m = dist.size();
  std::vector<double> out(q.size(), 0.0);
  if (m < 2) return out;
  const double h = dist.step;
  std::vector<double> beta(m, 0.0), edge_a(m), edge_b(m);
  for (std::size_t e = 0; e + 1 < m; ++e)
    beta[e] = (dist.values[e + 1] - dist.values[e]) / h;
  for (std::size_t e = 0; e < m; ++e) {
    const double x_e = dist.x(e);
    const double b_left = e > 0 ? beta[e - 1] : 0.0;
    const double b_right = e + 1 < m ? beta[e] : 0.0;
    const double a_left =
        e > 0 ? dist.values[e - 1] - b_left * (x_e - h) : 0.0;
    edge_a[e] = (dist.values[e] - b_right * x_e) - a_left;
    edge_b[e] = b_right - b_left;
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    double acc = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      if (edge_a[e] == 0.0 && edge_b[e] == 0.0) continue;
      const double u = q[i] - dist.x(e);
      acc += (edge_a[e] + q[i] * edge_b[e]) * prof.cdf(u) -
             edge_b[e] * prof.moment1(u);
    }
    out[i] = acc;
  }
  return out;
}

LatticeFn forward_lineshape(const VibronicParams& p, double out_step_ev) {
  require(p.gamma_zpl_ev > 0.0, Err::NonPositiveInput,
          "ZPL width must be positive");
  require(p.s_hr >= 0.0, Err::NegativeHuangRhys,
          "Huang-Rhys factor must be non-negative");
  LatticeFn i1 = one_phonon(p.psf, p.temperature_k);
  const int nmax = p.n_max > 0 ? p.n_max : auto_n_max(p.s_hr);
  LatticeFn sideband = psb(i1, p.s_hr, nmax);
  LineProfile prof(p.zpl_shape, p.gamma_zpl_ev);

  const double lo = -(p.psf.e_max_ev + 5.0 * p.gamma_zpl_ev);
  const double hi = nmax * p.psf.e_max_ev + 5.0 * p.gamma_zpl_ev;
  const double h = i1.step;
  double want = out_step_ev > 0.0 ? out_step_ev : p.gamma_zpl_ev / 16.0;
  long long k = std::max(1ll, std::llround(h / want));
  // Keep the output below ~4M samples.
  const double k_cap = 4e6 * h / (hi - lo);
  while (k > 1 && static_cast<double>(k) > k_cap) k /= 2;
  const double step = h / static_cast<double>(k);

  const long long m0 =
      static_cast<long long>(std::floor((lo - sideband.x0) / step));
  const double q0 = sideband.x0 + static_cast<double>(m0) * step;
  const std::size_t n_out =
      static_cast<std::size_t>(std::ceil((hi - q0) / step)) + 1;

  LatticeFn out;
  out.x0 = q0;
  out.step = step;
  out.values = convolve_profile(sideband, prof, q0, step, n_out);
  const double zpl_w = std::exp(-p.s_hr);
  for (std::size_t i = 0; i < n_out; ++i)
    out.values[i] += zpl_w * prof.pdf(out.x(i));

  double total = out.integral() -
                 0.5 * out.step * (out.values.front() + out.values.back());
  require(total > 0.0, Err::EmptySpectralFunction,
          "lineshape has no positive mass");
  for (double& v : out.values) v /= total;
  return out;
}

}  // namespace qekit::vibronic
