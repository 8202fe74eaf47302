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

#include "qekit/photophysics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qekit/constants.hpp"
#include "qekit/errors.hpp"
#include "qekit/least_squares.hpp"
#include "qekit/numerics.hpp"

namespace qekit::photo {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class FnModel : public lsq::ResidualModel {
 public:
  FnModel(int np, int nr, std::function<void(const VectorXd&, VectorXd&)> fn)
      : np_(np), nr_(nr), fn_(std::move(fn)) {}
  int n_params() const override { return np_; }
  int n_residuals() const override { return nr_; }
  void eval(const VectorXd& p, VectorXd& r) const override { fn_(p, r); }

 private:
  int np_, nr_;
  std::function<void(const VectorXd&, VectorXd&)> fn_;
};

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double logit(double a) { return std::log(a / (1.0 - a)); }

std::vector<double> safe_sigmas(const std::vector<double>& sigma,
                                const std::vector<double>& y) {
  std::vector<double> s(y.size(), 1.0);
  for (std::size_t i = 0; i < y.size() && i < sigma.size(); ++i)
    if (sigma[i] > 0.0) s[i] = sigma[i];
  return s;
}

// Without stated uncertainties the fit is unweighted; the covariance is then
// rescaled by the residual variance, the usual regression estimate.
void absorb_residual_scale(lsq::Result& res, bool have_sigma, int dof) {
  if (!have_sigma && dof > 0) res.covariance *= res.chi2 / dof;
}

FitQuality quality_of(const lsq::Result& res, int n_used, int n_params) {
  FitQuality q;
  q.converged = res.converged;
  q.iterations = res.iterations;
  int dof = n_used - n_params;
  q.chi2_reduced = dof > 0 ? res.chi2 / dof : 0.0;
  return q;
}

// Smooth-transform bookkeeping: natural value and d(natural)/d(internal).
struct Nat {
  double value;
  double deriv;
};

Nat nat_exp(double t) { return {std::exp(t), std::exp(t)}; }
Nat nat_square(double t) { return {t * t, 2.0 * t}; }
Nat nat_logistic(double t) {
  double a = logistic(t);
  return {a, a * (1.0 - a)};
}

double nat_sigma(const MatrixXd& cov, int i, double deriv) {
  double v = cov(i, i);
  return v > 0.0 ? std::fabs(deriv) * std::sqrt(v) : 0.0;
}

}  // namespace

const char* to_string(IrfMethod m) {
  return m == IrfMethod::linear ? "linear" : "quadrature";
}

IrfMethod irf_method_from_string(const std::string& s) {
  if (s == "linear") return IrfMethod::linear;
  if (s == "quadrature") return IrfMethod::quadrature;
  fail(Err::UnknownModel, "unknown IRF method '" + s + "'");
}

double correct_irf(double fwhm_raw, double fwhm_irf, IrfMethod method) {
  require(fwhm_raw > 0.0, Err::NegativeWidthInput,
          "raw width must be positive");
  require(fwhm_irf >= 0.0, Err::NegativeWidthInput,
          "instrument width must be non-negative");
  double out;
  if (method == IrfMethod::linear)
    out = fwhm_raw - fwhm_irf;
  else
    out = fwhm_raw * fwhm_raw - fwhm_irf * fwhm_irf;
  require(out > 0.0, Err::IrfExceedsRaw,
          "instrument response is as wide as the measured line");
  return method == IrfMethod::linear ? out : std::sqrt(out);
}

PeakFit fit_peak(const spectra::Spectrum& s, ZplShape shape,
                 std::optional<std::pair<double, double>> window_ev) {
  require(s.axis_kind == spectra::AxisKind::energy_ev, Err::NotEnergyDomain,
          "peak fitting expects an energy-domain spectrum");

  std::vector<double> x, y, sig;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (window_ev &&
        (s.axis[i] < window_ev->first || s.axis[i] > window_ev->second))
      continue;
    x.push_back(s.axis[i]);
    y.push_back(s.intensity[i]);
    sig.push_back(s.sigma[i]);
  }
  require(x.size() >= 6, Err::DegenerateData,
          "need at least 6 bins in the fit window");
  sig = safe_sigmas(sig, y);

  const double base0 = median(y);
  std::size_t imax = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[imax]) imax = i;
  const double height0 = y[imax] - base0;
  const double snr = height0 / sig[imax];
  require(snr >= 3.0, Err::NoPeakFound,
          "strongest excursion is below 3 sigma");

  // FWHM seed from the half-maximum crossings around the peak.
  const double half = base0 + 0.5 * height0;
  double xl = x.front(), xr = x.back();
  bool found_l = false, found_r = false;
  for (std::size_t i = imax; i-- > 0;) {
    if (y[i] < half) {
      double t = (half - y[i]) / (y[i + 1] - y[i]);
      xl = x[i] + t * (x[i + 1] - x[i]);
      found_l = true;
      break;
    }
  }
  for (std::size_t i = imax + 1; i < y.size(); ++i) {
    if (y[i] < half) {
      double t = (y[i - 1] - half) / (y[i - 1] - y[i]);
      xr = x[i - 1] + t * (x[i] - x[i - 1]);
      found_r = true;
      break;
    }
  }
  double fwhm0;
  if (found_l && found_r)
    fwhm0 = xr - xl;
  else if (found_l)
    fwhm0 = 2.0 * (x[imax] - xl);
  else if (found_r)
    fwhm0 = 2.0 * (xr - x[imax]);
  else
    fwhm0 = 0.25 * (x.back() - x.front());
  fwhm0 = std::max(fwhm0, 1e-9 * (x.back() - x.front()));

  const int n = static_cast<int>(x.size());
  auto residuals = [&](const VectorXd& p, VectorXd& r) {
    const double b = p[0];
    const double h = std::exp(p[1]);
    const double c = p[2];
    const double w = std::exp(p[3]);
    LineProfile prof(shape, w);
    const double top = prof.pdf(0.0);
    r.resize(n);
    for (int i = 0; i < n; ++i)
      r[i] = (b + h * prof.pdf(x[i] - c) / top - y[i]) / sig[i];
  };
  FnModel model(4, n, residuals);
  VectorXd p0(4);
  p0 << base0, std::log(height0), x[imax], std::log(fwhm0);
  lsq::Result res = lsq::solve(model, p0);

  PeakFit out;
  out.shape = shape;
  out.baseline = res.params[0];
  Nat h = nat_exp(res.params[1]);
  out.amplitude = h.value;
  out.center_ev = res.params[2];
  Nat w = nat_exp(res.params[3]);
  out.fwhm_ev = w.value;
  out.baseline_sigma = nat_sigma(res.covariance, 0, 1.0);
  out.amplitude_sigma = nat_sigma(res.covariance, 1, h.deriv);
  out.center_sigma = nat_sigma(res.covariance, 2, 1.0);
  out.fwhm_sigma = nat_sigma(res.covariance, 3, w.deriv);
  out.snr = snr;
  out.quality = quality_of(res, n, 4);
  return out;
}

PowerBroadeningFit fit_power_broadening(const XYSeries& d) {
  const std::size_t n = d.size();
  require(n >= 3, Err::InsufficientSpan, "need at least 3 powers");
  double pmin = d.x[0], pmax = d.x[0];
  for (double p : d.x) {
    require(p >= 0.0, Err::NonPositiveInput, "powers must be non-negative");
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
  }
  require(pmax >= 3.0 * pmin && pmax > pmin, Err::InsufficientSpan,
          "power range must span at least a factor of 3");
  for (double w : d.y)
    require(w > 0.0, Err::NegativeWidthInput, "widths must be positive");
  std::vector<double> sig = safe_sigmas(d.sigma, d.y);

  std::size_t ilo = 0, ihi = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (d.x[i] < d.x[ilo]) ilo = i;
    if (d.x[i] > d.x[ihi]) ihi = i;
  }
  double g0 = d.y[ilo];
  double ratio = (d.y[ihi] / g0) * (d.y[ihi] / g0) - 1.0;
  double pp0 = ratio > 0.05 ? d.x[ihi] / ratio : std::max(d.x[ihi], 1e-12);

  auto residuals = [&](const VectorXd& p, VectorXd& r) {
    const double g = std::exp(p[0]);
    const double ps = std::exp(p[1]);
    r.resize(static_cast<int>(n));
    for (std::size_t i = 0; i < n; ++i)
      r[static_cast<int>(i)] =
          (g * std::sqrt(1.0 + d.x[i] / ps) - d.y[i]) / sig[i];
  };
  FnModel model(2, static_cast<int>(n), residuals);
  VectorXd p0(2);
  p0 << std::log(g0), std::log(pp0);
  lsq::Result res = lsq::solve(model, p0);
  absorb_residual_scale(res, !d.sigma.empty(), static_cast<int>(n) - 2);

  PowerBroadeningFit out;
  Nat g = nat_exp(res.params[0]);
  Nat ps = nat_exp(res.params[1]);
  out.gamma0 = g.value;
  out.p0 = ps.value;
  out.gamma0_sigma = nat_sigma(res.covariance, 0, g.deriv);
  out.p0_sigma = nat_sigma(res.covariance, 1, ps.deriv);
  out.model.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.model[i] = g.value * std::sqrt(1.0 + d.x[i] / ps.value);
  out.quality = quality_of(res, static_cast<int>(n), 2);
  return out;
}

TemperatureBroadeningFit fit_temperature_broadening(const XYSeries& d,
                                                    std::optional<double> irf,
                                                    IrfMethod method) {
  const std::size_t n = d.size();
  require(n >= 3, Err::DegenerateData, "need at least 3 temperatures");
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(d.x[i] >= 0.0, Err::NonPositiveInput,
            "temperatures must be non-negative");
    require(d.y[i] > 0.0, Err::NegativeWidthInput, "widths must be positive");
    yc[i] = irf ? correct_irf(d.y[i], *irf, method) : d.y[i];
  }
  std::vector<double> sig = safe_sigmas(d.sigma, yc);

  double tmax = 0.0, ymean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tmax = std::max(tmax, d.x[i]);
    ymean += yc[i] / static_cast<double>(n);
  }
  require(tmax > 0.0, Err::DegenerateData, "all temperatures are zero");

  // Unconstrained weighted linear solve seeds the constrained fit.
  MatrixXd design(n, 3);
  VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0 / sig[i];
    design(static_cast<int>(i), 0) = w;
    design(static_cast<int>(i), 1) = w * d.x[i];
    design(static_cast<int>(i), 2) = w * std::pow(d.x[i], 5);
    rhs[static_cast<int>(i)] = w * yc[i];
  }
  VectorXd seed = design.colPivHouseholderQr().solve(rhs);
  const double a_floor = 1e-3 * ymean / tmax;
  const double b_floor = 1e-3 * ymean / std::pow(tmax, 5);
  double g0 = std::max(seed[0], 0.05 * ymean);
  double alpha0 = std::sqrt(std::max(seed[1], a_floor));
  double beta0 = std::sqrt(std::max(seed[2], b_floor));

  auto curve = [&](double g, double a, double b, double t) {
    return g + a * t + b * std::pow(t, 5);
  };
  auto residuals = [&](const VectorXd& p, VectorXd& r) {
    const double g = std::exp(p[0]);
    const double a = p[1] * p[1];
    const double b = p[2] * p[2];
    r.resize(static_cast<int>(n));
    for (std::size_t i = 0; i < n; ++i)
      r[static_cast<int>(i)] = (curve(g, a, b, d.x[i]) - yc[i]) / sig[i];
  };
  FnModel model(3, static_cast<int>(n), residuals);
  VectorXd p0(3);
  p0 << std::log(g0), alpha0, beta0;
  lsq::Result res = lsq::solve(model, p0);
  absorb_residual_scale(res, !d.sigma.empty(), static_cast<int>(n) - 3);

  TemperatureBroadeningFit out;
  Nat g = nat_exp(res.params[0]);
  Nat a = nat_square(res.params[1]);
  Nat b = nat_square(res.params[2]);
  out.gamma0 = g.value;
  out.a = a.value;
  out.b = b.value;
  out.gamma0_sigma = nat_sigma(res.covariance, 0, g.deriv);
  out.a_sigma = nat_sigma(res.covariance, 1, a.deriv);
  out.b_sigma = nat_sigma(res.covariance, 2, b.deriv);
  out.irf_fwhm = irf;
  out.model.resize(n);
  out.component_const.assign(n, g.value);
  out.component_linear.resize(n);
  out.component_t5.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.component_linear[i] = a.value * d.x[i];
    out.component_t5[i] = b.value * std::pow(d.x[i], 5);
    out.model[i] = curve(g.value, a.value, b.value, d.x[i]);
  }
  out.quality = quality_of(res, static_cast<int>(n), 3);
  return out;
}

SaturationFit fit_saturation(const XYSeries& d, bool with_linear_term) {
  const std::size_t n = d.size();
  require(n >= 3, Err::DegenerateData, "need at least 3 powers");
  double ymax = 0.0, pmin = d.x[0], pmax = d.x[0];
  for (std::size_t i = 0; i < n; ++i) {
    require(d.x[i] >= 0.0, Err::NonPositiveInput,
            "powers must be non-negative");
    ymax = std::max(ymax, d.y[i]);
    pmin = std::min(pmin, d.x[i]);
    pmax = std::max(pmax, d.x[i]);
  }
  require(ymax > 0.0, Err::AllZeroIntensity, "no positive intensities");
  require(pmax >= 3.0 * pmin && pmax > pmin, Err::InsufficientSpan,
          "power range must span at least a factor of 3");
  std::vector<double> sig = safe_sigmas(d.sigma, d.y);

  // Half-saturation seed: first power where the curve passes ymax / 2.
  double psat0 = 0.5 * (pmin + pmax);
  for (std::size_t i = 0; i < n; ++i)
    if (d.y[i] >= 0.5 * ymax) {
      psat0 = std::max(d.x[i], 1e-6 * pmax);
      break;
    }

  const int np = with_linear_term ? 3 : 2;
  auto residuals = [&](const VectorXd& p, VectorXd& r) {
    const double isat = std::exp(p[0]);
    const double psat = std::exp(p[1]);
    const double slope = with_linear_term ? p[2] : 0.0;
    r.resize(static_cast<int>(n));
    for (std::size_t i = 0; i < n; ++i) {
      double m = isat * d.x[i] / (d.x[i] + psat) + slope * d.x[i];
      r[static_cast<int>(i)] = (m - d.y[i]) / sig[i];
    }
  };
  FnModel model(np, static_cast<int>(n), residuals);
  VectorXd p0(np);
  p0[0] = std::log(1.5 * ymax);
  p0[1] = std::log(psat0);
  if (with_linear_term) p0[2] = 0.0;
  lsq::Result res = lsq::solve(model, p0);
  absorb_residual_scale(res, !d.sigma.empty(), static_cast<int>(n) - np);

  SaturationFit out;
  Nat isat = nat_exp(res.params[0]);
  Nat psat = nat_exp(res.params[1]);
  out.i_sat = isat.value;
  out.p_sat = psat.value;
  out.i_sat_sigma = nat_sigma(res.covariance, 0, isat.deriv);
  out.p_sat_sigma = nat_sigma(res.covariance, 1, psat.deriv);
  if (with_linear_term) {
    out.slope = res.params[2];
    out.slope_sigma = nat_sigma(res.covariance, 2, 1.0);
  }
  out.model.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.model[i] = isat.value * d.x[i] / (d.x[i] + psat.value) +
                   (with_linear_term ? res.params[2] * d.x[i] : 0.0);
  out.quality = quality_of(res, static_cast<int>(n), np);
  return out;
}

namespace {

// exp(-|tau|/tau0) convolved with a unit-area Gaussian of width sigma;
// reduces to the bare exponential when sigma is zero.  Stable composition
// of erfcx terms keeps every exponent bounded.
double exp_gauss_conv(double tau, double tau0, double sigma) {
  tau = std::fabs(tau);
  if (sigma <= 0.0) return std::exp(-tau / tau0);
  const double rt2 = std::sqrt(2.0);
  const double pre = -0.5 * (tau / sigma) * (tau / sigma);
  const double b1 = (sigma / tau0 - tau / sigma) / rt2;
  const double b2 = (sigma / tau0 + tau / sigma) / rt2;
  double t1;
  if (b1 >= 0.0)
    t1 = 0.5 * std::exp(pre) * erfcx(b1);
  else
    t1 = std::exp(0.5 * (sigma / tau0) * (sigma / tau0) - tau / tau0) -
         0.5 * std::exp(pre) * erfcx(-b1);
  const double t2 = 0.5 * std::exp(pre) * erfcx(b2);
  return t1 + t2;
}

}  // namespace

G2Fit fit_g2(const XYSeries& d, std::optional<double> irf_fwhm,
             bool fit_normalization) {
  const std::size_t n = d.size();
  require(n >= 8, Err::DegenerateData, "need at least 8 delay bins");
  double tau_abs_max = 0.0;
  for (double t : d.x) tau_abs_max = std::max(tau_abs_max, std::fabs(t));
  require(tau_abs_max > 0.0, Err::DegenerateData, "zero delay span");

  std::vector<double> sig = safe_sigmas(d.sigma, d.y);

  double asym = 0.0;
  int n_out = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::fabs(d.x[i]) >= 0.75 * tau_abs_max) {
      asym += d.y[i];
      ++n_out;
    }
  asym = n_out > 0 ? asym / n_out : 1.0;
  if (!fit_normalization)
    require(std::fabs(asym - 1.0) <= 0.2, Err::UnnormalizedHistogram,
            "histogram tails deviate from 1 by more than 20%; normalize or "
            "enable normalization fitting");

  const double sigma_irf =
      irf_fwhm ? *irf_fwhm / kGaussFwhmPerSigma : 0.0;
  if (irf_fwhm)
    require(*irf_fwhm > 0.0, Err::NonPositiveInput,
            "IRF width must be positive");

  // Bins inside one bin width of zero delay carry no weight without an IRF
  // model; the dip there is limited by timing resolution, not physics.
  std::vector<double> spacing;
  for (std::size_t i = 1; i < n; ++i) spacing.push_back(d.x[i] - d.x[i - 1]);
  const double bin = median(spacing);
  std::vector<bool> used(n, true);
  int n_used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!irf_fwhm && std::fabs(d.x[i]) < bin) used[i] = false;
    if (used[i]) ++n_used;
  }
  require(n_used >= 5, Err::DegenerateData, "too few usable delay bins");

  const double norm0 = fit_normalization ? asym : 1.0;
  double ymin = d.y[0];
  for (double v : d.y) ymin = std::min(ymin, v);
  double alpha0 = std::min(std::max(1.0 - ymin / norm0, 0.05), 0.98);
  double area = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    double fa = std::max(norm0 - d.y[i - 1], 0.0);
    double fb = std::max(norm0 - d.y[i], 0.0);
    area += 0.5 * (fa + fb) * (d.x[i] - d.x[i - 1]);
  }
  double tau00 = area / (2.0 * norm0 * alpha0);
  tau00 = std::min(std::max(tau00, 0.5 * bin), tau_abs_max);

  const int np = fit_normalization ? 3 : 2;
  auto residuals = [&](const VectorXd& p, VectorXd& r) {
    const double alpha = logistic(p[0]);
    const double tau0 = std::exp(p[1]);
    const double nn = fit_normalization ? std::exp(p[2]) : 1.0;
    r.resize(n_used);
    int k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!used[i]) continue;
      double m = nn * (1.0 - alpha * exp_gauss_conv(d.x[i], tau0, sigma_irf));
      r[k++] = (m - d.y[i]) / sig[i];
    }
  };
  FnModel model(np, n_used, residuals);
  VectorXd p0(np);
  p0[0] = logit(alpha0);
  p0[1] = std::log(tau00);
  if (fit_normalization) p0[2] = std::log(std::max(norm0, 1e-3));
  lsq::Result res = lsq::solve(model, p0);
  absorb_residual_scale(res, !d.sigma.empty(), n_used - np);

  G2Fit out;
  Nat alpha = nat_logistic(res.params[0]);
  Nat tau0 = nat_exp(res.params[1]);
  out.alpha = alpha.value;
  out.tau0 = tau0.value;
  out.alpha_sigma = nat_sigma(res.covariance, 0, alpha.deriv);
  out.tau0_sigma = nat_sigma(res.covariance, 1, tau0.deriv);
  out.normalization = fit_normalization ? std::exp(res.params[2]) : 1.0;
  out.g2_zero_raw = out.normalization *
                    (1.0 - alpha.value * exp_gauss_conv(0.0, tau0.value, sigma_irf));
  if (irf_fwhm) out.g2_zero_irf_corrected = 1.0 - alpha.value;
  out.model.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.model[i] = out.normalization *
                   (1.0 - alpha.value * exp_gauss_conv(d.x[i], tau0.value, sigma_irf));
  out.quality = quality_of(res, n_used, np);
  return out;
}

LifetimeFit fit_lifetime(const XYSeries& d) {
  const std::size_t n = d.size();
  require(n >= 8, Err::DegenerateData, "need at least 8 samples");
  std::size_t ip = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (d.y[i] > d.y[ip]) ip = i;
  const std::size_t nd = n - ip;
  require(nd >= 8, Err::DegenerateData,
          "need at least 8 samples from the peak on");

  std::vector<double> t(nd), y(nd), sg(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    t[i] = d.x[ip + i] - d.x[ip];
    y[i] = d.y[ip + i];
    sg[i] = d.sigma.empty() ? 0.0 : d.sigma[ip + i];
  }
  sg = safe_sigmas(sg, y);

  std::size_t ntail = std::max<std::size_t>(3, nd / 10);
  double base0 = 0.0;
  for (std::size_t i = nd - ntail; i < nd; ++i) base0 += y[i] / ntail;
  double a0 = y[0] - base0;
  require(a0 > 0.0, Err::DegenerateData, "no decay above the baseline");
  double target = base0 + a0 / M_E;
  double tau0 = t.back() / 3.0;
  for (std::size_t i = 1; i < nd; ++i)
    if (y[i] <= target) {
      tau0 = std::max(t[i], 1e-12);
      break;
    }

  auto residuals = [&](const VectorXd& p, VectorXd& r) {
    const double b = p[0];
    const double a = std::exp(p[1]);
    const double tau = std::exp(p[2]);
    r.resize(static_cast<int>(nd));
    for (std::size_t i = 0; i < nd; ++i)
      r[static_cast<int>(i)] = (b + a * std::exp(-t[i] / tau) - y[i]) / sg[i];
  };
  FnModel model(3, static_cast<int>(nd), residuals);
  VectorXd p0(3);
  p0 << base0, std::log(a0), std::log(tau0);
  lsq::Result res = lsq::solve(model, p0);
  absorb_residual_scale(res, !d.sigma.empty(), static_cast<int>(nd) - 3);

  LifetimeFit out;
  Nat a = nat_exp(res.params[1]);
  Nat tau = nat_exp(res.params[2]);
  out.baseline = res.params[0];
  out.amplitude = a.value;
  out.tau = tau.value;
  out.baseline_sigma = nat_sigma(res.covariance, 0, 1.0);
  out.amplitude_sigma = nat_sigma(res.covariance, 1, a.deriv);
  out.tau_sigma = nat_sigma(res.covariance, 2, tau.deriv);
  out.t_peak = d.x[ip];
  out.t_fitted.resize(nd);
  out.model.resize(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    out.t_fitted[i] = d.x[ip + i];
    out.model[i] = res.params[0] + a.value * std::exp(-t[i] / tau.value);
  }
  out.quality = quality_of(res, static_cast<int>(nd), 3);
  return out;
}

double radiative_lifetime_ns(double e_zpl_ev, double dipole_e_angstrom,
                             double n_host) {
  require(e_zpl_ev > 0.0, Err::NonPositiveInput,
          "transition energy must be positive");
  require(dipole_e_angstrom > 0.0, Err::NonPositiveInput,
          "dipole moment must be positive");
  require(n_host > 0.0, Err::NonPositiveInput,
          "refractive index must be positive");
  namespace cn = constants;
  const double e_j = e_zpl_ev * cn::elementary_charge_c;
  const double mu = dipole_e_angstrom * cn::elementary_charge_c * 1e-10;
  const double hbar = cn::hbar_j_s;
  const double c = cn::speed_of_light_m_per_s;
  const double tau_s = 3.0 * M_PI * cn::vacuum_permittivity_f_per_m *
                       hbar * hbar * hbar * hbar * c * c * c /
                       (n_host * e_j * e_j * e_j * mu * mu);
  return tau_s * 1e9;
}

}  // namespace qekit::photo
