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

#ifndef QEKIT_PHOTOPHYSICS_HPP
#define QEKIT_PHOTOPHYSICS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qekit/dataset.hpp"
#include "qekit/line_profile.hpp"
#include "qekit/spectrum.hpp"

namespace qekit::photo {

struct FitQuality {
  double chi2_reduced = 0.0;
  int iterations = 0;
  bool converged = false;
};

enum class IrfMethod { linear, quadrature };
const char* to_string(IrfMethod m);
IrfMethod irf_method_from_string(const std::string& s);

/// Removes the instrument response width from a measured FWHM.  `linear`
/// applies to Lorentzian-on-Lorentzian convolution, `quadrature` to
/// Gaussian-on-Gaussian.  Throws IrfExceedsRaw when nothing is left.
double correct_irf(double fwhm_raw, double fwhm_irf, IrfMethod method);

struct PeakFit {
  ZplShape shape = ZplShape::lorentzian;
  double center_ev = 0.0, center_sigma = 0.0;
  double fwhm_ev = 0.0, fwhm_sigma = 0.0;
  std::optional<double> fwhm_irf_corrected_ev;
  double amplitude = 0.0, amplitude_sigma = 0.0;  // height above baseline
  double baseline = 0.0, baseline_sigma = 0.0;
  double snr = 0.0;
  FitQuality quality;
};

/// Fits a single line on a flat baseline to an energy-domain spectrum,
/// optionally restricted to an energy window.  Throws NoPeakFound when the
/// strongest excursion above the median is below 3 sigma.
PeakFit fit_peak(const spectra::Spectrum& s, ZplShape shape,
                 std::optional<std::pair<double, double>> window_ev = {});

struct PowerBroadeningFit {
  double gamma0 = 0.0, gamma0_sigma = 0.0;  // zero-power FWHM, input units
  double p0 = 0.0, p0_sigma = 0.0;          // saturation power, input units
  std::vector<double> model;                // at the input powers
  FitQuality quality;
};

/// FWHM(P) = gamma0 * sqrt(1 + P / P0).  Needs >= 3 points spanning at
/// least a factor 3 in power (InsufficientSpan otherwise).
PowerBroadeningFit fit_power_broadening(const XYSeries& d);

struct TemperatureBroadeningFit {
  double gamma0 = 0.0, gamma0_sigma = 0.0;
  double a = 0.0, a_sigma = 0.0;  // linear coefficient, width per K
  double b = 0.0, b_sigma = 0.0;  // T^5 coefficient
  std::optional<double> irf_fwhm;
  std::vector<double> model;            // total at the input temperatures
  std::vector<double> component_const;  // gamma0
  std::vector<double> component_linear; // a T
  std::vector<double> component_t5;     // b T^5
  FitQuality quality;
};

/// FWHM(T) = gamma0 + a T + b T^5 with a, b constrained non-negative.  An
/// instrument width, when given, is removed from every input first.
TemperatureBroadeningFit fit_temperature_broadening(
    const XYSeries& d, std::optional<double> irf_fwhm = {},
    IrfMethod method = IrfMethod::linear);

struct SaturationFit {
  double i_sat = 0.0, i_sat_sigma = 0.0;
  double p_sat = 0.0, p_sat_sigma = 0.0;
  std::optional<double> slope, slope_sigma;  // linear background term
  std::vector<double> model;
  FitQuality quality;
};

/// I(P) = I_sat * P / (P + P_sat), optionally plus slope * P.
SaturationFit fit_saturation(const XYSeries& d, bool with_linear_term = false);

struct G2Fit {
  double alpha = 0.0, alpha_sigma = 0.0;  // dip contrast, deconvolved
  double tau0 = 0.0, tau0_sigma = 0.0;    // correlation time, input units
  double normalization = 1.0;
  double g2_zero_raw = 0.0;               // model at tau = 0 including IRF
  std::optional<double> g2_zero_irf_corrected;  // 1 - alpha when IRF given
  std::vector<double> model;
  FitQuality quality;
};

/// g2(tau) = N (1 - alpha exp(-|tau|/tau0)), optionally convolved with a
/// Gaussian IRF of the given FWHM.  The histogram must be normalized to 1
/// at large |tau| unless `fit_normalization` frees N.
G2Fit fit_g2(const XYSeries& d, std::optional<double> irf_fwhm = {},
             bool fit_normalization = false);

struct LifetimeFit {
  double tau = 0.0, tau_sigma = 0.0;  // input time units
  double amplitude = 0.0, amplitude_sigma = 0.0;
  double baseline = 0.0, baseline_sigma = 0.0;
  double t_peak = 0.0;
  std::vector<double> model;  // over the fitted (decay-side) samples
  std::vector<double> t_fitted;
  FitQuality quality;
};

/// Exponential decay plus flat baseline, fitted from the trace maximum on.
LifetimeFit fit_lifetime(const XYSeries& d);

/// Spontaneous-emission lifetime in ns for a two-level emitter with
/// transition energy `e_zpl_ev`, dipole moment `dipole_e_angstrom` (units of
/// elementary charge times Angstrom) embedded in refractive index `n_host`.
double radiative_lifetime_ns(double e_zpl_ev, double dipole_e_angstrom,
                             double n_host);

}  // namespace qekit::photo

#endif  // QEKIT_PHOTOPHYSICS_HPP
