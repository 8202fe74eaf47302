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

#ifndef QEKIT_VIBRONIC_HPP
#define QEKIT_VIBRONIC_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "qekit/line_profile.hpp"
#include "qekit/numerics.hpp"
#include "qekit/spectrum.hpp"

namespace qekit::vibronic {

/// Bose-Einstein occupation 1 / (exp(E / kB T) - 1).
double bose_einstein(double e_ev, double t_k);

/// One-phonon coupling density S(E) sampled at the bin midpoints
/// E_i = (i + 1/2) delta_e on [0, e_max].  Between midpoints the density is
/// interpolated linearly; below the first midpoint it falls linearly to
/// S(0) = 0, above the last midpoint it stays constant up to e_max and is
/// zero beyond.  The overall scale is immaterial for the emission model
/// (the one-phonon distribution is normalized); fits report values scaled
/// so the [0, e_max] integral equals the Huang-Rhys factor.
struct PhononSpectralFunction {
  double delta_e_ev = 0.002;
  double e_max_ev = 0.200;
  std::vector<double> values;

  void validate() const;
  std::size_t bins() const { return values.size(); }
  double midpoint(std::size_t i) const {
    return (static_cast<double>(i) + 0.5) * delta_e_ev;
  }
  double at(double e_ev) const;
  /// Trapezoidal integral of the interpolant over [0, e_max].
  double integral() const;
  static PhononSpectralFunction uniform(double delta_e_ev, double e_max_ev,
                                        double value = 1.0);
};

/// Normalized one-phonon emission/absorption distribution at temperature
/// t_k, sampled on a symmetric lattice of the given step (default
/// delta_e / 2).  Positive energies are phonon emission weighted by n+1,
/// negative ones absorption weighted by n.
LatticeFn one_phonon(const PhononSpectralFunction& psf, double t_k,
                     double step_ev = 0.0);

/// The constant A with I1 = A * [Bose-weighted S]; derived, not stored.
double one_phonon_normalization(const PhononSpectralFunction& psf, double t_k,
                                double step_ev = 0.0);

/// n-fold convolution power of the one-phonon distribution.
LatticeFn n_phonon(const LatticeFn& i1, int n);

/// Smallest n with cumulative Poisson weight >= 1 - tail_tol, capped.
int auto_n_max(double s_hr, double tail_tol = 1e-6, int cap = 20);

/// w_n = exp(-s) s^n / n! for n = 1..n_max.
std::vector<double> poisson_weights(double s_hr, int n_max);

/// Phonon sideband sum_n w_n I_n before the ZPL convolution.
LatticeFn psb(const LatticeFn& i1, double s_hr, int n_max);

struct VibronicParams {
  double e_zpl_ev = 1.567;
  double gamma_zpl_ev = 150e-6;
  double s_hr = 1.0;
  double temperature_k = 4.0;
  ZplShape zpl_shape = ZplShape::lorentzian;
  int n_max = 0;  // 0 selects the truncation rule
  PhononSpectralFunction psf;
};

/// Convolves a lattice density with a line profile centered at zero and
/// returns it sampled on [q0, q0 + (n_out-1) step]; `step` must divide the
/// lattice step.  Closed-form segment integrals, no quadrature error beyond
/// the piecewise-linear representation itself.
std::vector<double> convolve_profile(const LatticeFn& dist,
                                     const LineProfile& prof, double q0,
                                     double step, std::size_t n_out);

/// Same integral evaluated at arbitrary points.
std::vector<double> convolve_profile_at(const LatticeFn& dist,
                                        const LineProfile& prof,
                                        const std::vector<double>& q);

/// Full emission lineshape against dE = E_zpl - E: ZPL of weight exp(-S)
/// plus the ZPL-convolved phonon sideband, normalized to unit integral on
/// the returned window [-e_max - 5 gamma, n_max e_max + 5 gamma].
LatticeFn forward_lineshape(const VibronicParams& p, double out_step_ev = 0.0);

struct VibronicFitConfig {
  double delta_e_ev = 0.002;
  double e_max_ev = 0.200;
  ZplShape zpl_shape = ZplShape::lorentzian;
  int n_max = 0;              // 0 = truncation rule per evaluation
  double conv_step_ev = 0.0;  // 0 = delta_e / 2
  bool fit_gamma = true;      // false pins the ZPL width at gamma_fixed_ev
  double gamma_fixed_ev = 0.0;
  double zpl_window_gammas = 3.0;  // seed window for the S estimate
  double tail_tol = 1e-6;
  double smoothness = 0.0;  // first-difference penalty weight on the psf
  int max_iterations = 500;
};

struct NPhononComponent {
  int n = 0;
  double weight = 0.0;
  LatticeFn shape;  // I_n before the ZPL convolution
};

struct VibronicFit {
  VibronicParams params;
  double e_zpl_sigma = 0.0;
  double gamma_sigma = 0.0;
  double s_hr_sigma = 0.0;
  double amplitude = 1.0;  // internal scale between model and data units
  double zpl_weight = 0.0;
  double chi2_reduced = 0.0;
  int iterations = 0;
  bool converged = false;
  int n_max_used = 0;
  std::vector<NPhononComponent> components;
  std::vector<double> model;      // amplitude * lineshape at the data points
  std::vector<double> residuals;  // weighted
  Eigen::MatrixXd covariance;     // natural units over [e_zpl, gamma, s_hr]
};

/// Weighted fit of the vibronic model to a lineshape.  Free parameters:
/// E_zpl, Gamma_zpl (optional), S_HR = v^2, the psf values S_i = exp(w_i)
/// and an overall amplitude.  The psf scale is gauge-fixed internally (the
/// model is invariant under psf rescaling) and reported with integral
/// equal to S_HR.
VibronicFit fit_vibronic(const spectra::Lineshape& data,
                         const VibronicFitConfig& cfg, double temperature_k);

struct JacobianProbe {
  Eigen::VectorXd point;     // internal parameterization
  Eigen::VectorXd residual;
  Eigen::MatrixXd analytic;
  Eigen::MatrixXd finite_difference;  // central differences
};

/// Residual Jacobian diagnostics at the fit's initial point displaced by
/// `offset` (pass a size-0 vector for none).  Every real-valued point is
/// feasible: the internal parameterization squares or exponentiates all
/// sign-constrained quantities.  The shift/width curvature makes the
/// difference quotient sensitive to the step; ~3e-7 balances truncation
/// against rounding for these residuals.
JacobianProbe probe_jacobian(const spectra::Lineshape& data,
                             const VibronicFitConfig& cfg,
                             double temperature_k,
                             const Eigen::VectorXd& offset,
                             double fd_step_scale = 3e-7);

struct SeriesElement {
  double temperature_k = 0.0;
  bool ok = false;
  std::string error;
  VibronicFit fit;
};

struct TemperatureSeriesFit {
  std::vector<SeriesElement> elements;
  double s_hr_mean = 0.0;
  double s_hr_mean_sigma = 0.0;
  std::vector<double> z_scores;  // per successful element
  bool temperature_independent = false;
};

/// Independent per-temperature fits plus an inverse-variance weighted mean
/// of S_HR; the series is flagged temperature-independent when every
/// successful element sits within 3 sigma of the mean.
TemperatureSeriesFit fit_temperature_series(
    const std::vector<std::pair<spectra::Lineshape, double>>& series,
    const VibronicFitConfig& cfg);

}  // namespace qekit::vibronic

#endif  // QEKIT_VIBRONIC_HPP
