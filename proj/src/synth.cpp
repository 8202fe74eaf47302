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

#include "qekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qekit/constants.hpp"
#include "qekit/errors.hpp"
#include "qekit/line_profile.hpp"

namespace qekit::synth {

const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::poisson: return "poisson";
    case NoiseKind::gaussian: return "gaussian";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "poisson") return NoiseKind::poisson;
  if (s == "gaussian") return NoiseKind::gaussian;
  fail(Err::UnknownModel, "unknown noise kind: " + s);
}

const char* to_string(ScalarModel m) {
  switch (m) {
    case ScalarModel::power_broadening: return "power_broadening";
    case ScalarModel::temperature_broadening: return "temperature_broadening";
    case ScalarModel::saturation: return "saturation";
    case ScalarModel::g2: return "g2";
    case ScalarModel::lifetime: return "lifetime";
  }
  return "unknown";
}

ScalarModel scalar_model_from_string(const std::string& s) {
  if (s == "power_broadening") return ScalarModel::power_broadening;
  if (s == "temperature_broadening") return ScalarModel::temperature_broadening;
  if (s == "saturation") return ScalarModel::saturation;
  if (s == "g2") return ScalarModel::g2;
  if (s == "lifetime") return ScalarModel::lifetime;
  fail(Err::UnknownModel, "unknown scalar model: " + s);
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void apply_noise(std::vector<double>& y, std::vector<double>& sigma,
                 const NoiseModel& noise) {
  switch (noise.kind) {
    case NoiseKind::none:
      return;
    case NoiseKind::poisson: {
      Rng rng(noise.seed);
      sigma.resize(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double mean = std::max(y[i], 0.0);
        y[i] = static_cast<double>(rng.next_poisson(mean));
        sigma[i] = std::sqrt(std::max(y[i], 1.0));
      }
      return;
    }
    case NoiseKind::gaussian: {
      require(noise.scale > 0.0, Err::NonPositiveInput,
              "gaussian noise needs a positive sigma");
      Rng rng(noise.seed);
      sigma.assign(y.size(), noise.scale);
      for (double& v : y) v += noise.scale * rng.next_gaussian();
      return;
    }
  }
}

double need(const std::map<std::string, double>& p, const std::string& key) {
  auto it = p.find(key);
  require(it != p.end(), Err::ConfigError, "missing model parameter: " + key);
  return it->second;
}

double opt(const std::map<std::string, double>& p, const std::string& key,
           double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

// The antibunching dip seen through a Gaussian timing response, evaluated
// by Simpson quadrature split at the |tau| kink (independent of the
// closed-form expression the fitter uses).
double g2_through_irf(double tau, double alpha, double tau0, double norm,
                      double sig) {
  auto bare = [&](double t) {
    return norm * (1.0 - alpha * std::exp(-std::fabs(t) / tau0));
  };
  auto kernel = [&](double s) {
    const double z = s / sig;
    return std::exp(-0.5 * z * z) / (sig * std::sqrt(2.0 * M_PI));
  };
  auto simpson = [&](double a, double b) {
    const int n = 400;  // even
    const double h = (b - a) / n;
    double acc = kernel(a) * bare(tau - a) + kernel(b) * bare(tau - b);
    for (int i = 1; i < n; ++i) {
      const double s = a + h * i;
      acc += kernel(s) * bare(tau - s) * (i % 2 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
  };
  const double lo = -8.0 * sig, hi = 8.0 * sig;
  const double kink = std::clamp(tau, lo, hi);
  return simpson(lo, kink) + simpson(kink, hi);
}

}  // namespace

spectra::Spectrum gen_vibronic_spectrum(const vibronic::VibronicParams& p,
                                        const std::vector<double>& wavelength_nm,
                                        const NoiseModel& noise,
                                        double peak_counts) {
  require(wavelength_nm.size() >= 8, Err::InvalidSpectrum,
          "need at least 8 wavelength samples");
  require(p.gamma_zpl_ev > 0.0, Err::NonPositiveInput,
          "ZPL width must be positive");
  require(p.s_hr >= 0.0, Err::NegativeHuangRhys,
          "Huang-Rhys factor must be non-negative");

  const double hc = constants::hc_ev_nm;
  const std::size_t n = wavelength_nm.size();
  std::vector<double> de(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(wavelength_nm[i] > 0.0, Err::NonPositiveWavelength,
            "wavelengths must be positive");
    de[i] = p.e_zpl_ev - hc / wavelength_nm[i];
  }

  const LineProfile prof(p.zpl_shape, p.gamma_zpl_ev);
  int nmax = p.n_max;
  std::vector<double> value(n, 0.0);
  if (p.s_hr > 0.0) {
    LatticeFn i1 = vibronic::one_phonon(p.psf, p.temperature_k);
    if (nmax <= 0) nmax = vibronic::auto_n_max(p.s_hr);
    LatticeFn sideband = vibronic::psb(i1, p.s_hr, nmax);
    value = vibronic::convolve_profile_at(sideband, prof, de);
  } else if (nmax <= 0) {
    nmax = 1;
  }
  const double zpl_w = std::exp(-p.s_hr);
  for (std::size_t i = 0; i < n; ++i) value[i] += zpl_w * prof.pdf(de[i]);

  // Undo the E^3 normalization and the wavelength->energy Jacobian so the
  // result lives in raw wavelength-domain counts.
  std::vector<double> counts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = hc / wavelength_nm[i];
    counts[i] =
        value[i] * e * e * e * hc / (wavelength_nm[i] * wavelength_nm[i]);
  }
  const double peak =
      noise.kind == NoiseKind::poisson ? noise.scale : peak_counts;
  require(peak > 0.0, Err::NonPositiveInput, "peak counts must be positive");
  const double cmax = *std::max_element(counts.begin(), counts.end());
  require(cmax > 0.0, Err::AllZeroIntensity,
          "model is zero over the whole wavelength grid");
  for (double& cv : counts) cv *= peak / cmax;

  std::vector<double> sigma;
  apply_noise(counts, sigma, noise);

  spectra::Spectrum out(spectra::AxisKind::wavelength_nm, wavelength_nm,
                        counts, sigma);
  out.metadata["calibrated"] = "true";
  out.metadata["true_e_zpl_ev"] = fmt(p.e_zpl_ev);
  out.metadata["true_gamma_zpl_ev"] = fmt(p.gamma_zpl_ev);
  out.metadata["true_s_hr"] = fmt(p.s_hr);
  out.metadata["true_temperature_k"] = fmt(p.temperature_k);
  out.metadata["true_zpl_shape"] = to_string(p.zpl_shape);
  out.metadata["true_n_max"] = std::to_string(nmax);
  if (p.s_hr > 0.0) {
    out.metadata["true_psf_delta_e_ev"] = fmt(p.psf.delta_e_ev);
    out.metadata["true_psf_e_max_ev"] = fmt(p.psf.e_max_ev);
    std::string vals;
    for (std::size_t j = 0; j < p.psf.values.size(); ++j) {
      if (j) vals += ',';
      vals += fmt(p.psf.values[j]);
    }
    out.metadata["true_psf_values"] = vals;
  }
  out.metadata["noise_kind"] = to_string(noise.kind);
  if (noise.kind != NoiseKind::none) {
    out.metadata["noise_scale"] = fmt(noise.scale);
    out.metadata["noise_seed"] = std::to_string(noise.seed);
  }
  return out;
}

XYSeries gen_scalar_dataset(ScalarModel model,
                            const std::map<std::string, double>& true_params,
                            const std::vector<double>& sample_points,
                            const NoiseModel& noise) {
  require(!sample_points.empty(), Err::DegenerateData,
          "need at least one sample point");
  XYSeries out;
  out.x = sample_points;
  out.y.resize(sample_points.size());

  switch (model) {
    case ScalarModel::power_broadening: {
      const double g0 = need(true_params, "gamma0_ev");
      const double p0 = need(true_params, "p0");
      require(g0 > 0.0 && p0 > 0.0, Err::NonPositiveInput,
              "gamma0_ev and p0 must be positive");
      out.x_name = "power";
      out.y_name = "fwhm_ev";
      for (std::size_t i = 0; i < out.x.size(); ++i)
        out.y[i] = g0 * std::sqrt(1.0 + out.x[i] / p0);
      break;
    }
    case ScalarModel::temperature_broadening: {
      const double g0 = need(true_params, "gamma0_ev");
      const double a = need(true_params, "a_ev_per_k");
      const double b = need(true_params, "b_ev_per_k5");
      require(g0 > 0.0 && a >= 0.0 && b >= 0.0, Err::NonPositiveInput,
              "broadening coefficients must be non-negative");
      out.x_name = "temperature_k";
      out.y_name = "fwhm_ev";
      for (std::size_t i = 0; i < out.x.size(); ++i) {
        const double t = out.x[i];
        out.y[i] = g0 + a * t + b * t * t * t * t * t;
      }
      break;
    }
    case ScalarModel::saturation: {
      const double isat = need(true_params, "i_sat");
      const double psat = need(true_params, "p_sat");
      const double slope = opt(true_params, "slope", 0.0);
      require(isat > 0.0 && psat > 0.0, Err::NonPositiveInput,
              "i_sat and p_sat must be positive");
      out.x_name = "power";
      out.y_name = "counts_per_s";
      for (std::size_t i = 0; i < out.x.size(); ++i)
        out.y[i] = isat * out.x[i] / (out.x[i] + psat) + slope * out.x[i];
      break;
    }
    case ScalarModel::g2: {
      const double alpha = need(true_params, "alpha");
      const double tau0 = need(true_params, "tau0_ns");
      const double norm = opt(true_params, "norm", 1.0);
      const double irf = opt(true_params, "irf_fwhm_ns", 0.0);
      require(alpha >= 0.0 && alpha <= 1.0, Err::NonPositiveInput,
              "alpha must lie in [0, 1]");
      require(tau0 > 0.0 && norm > 0.0, Err::NonPositiveInput,
              "tau0_ns and norm must be positive");
      out.x_name = "tau_ns";
      out.y_name = "g2";
      const double sig = irf / kGaussFwhmPerSigma;
      for (std::size_t i = 0; i < out.x.size(); ++i) {
        const double tau = out.x[i];
        if (irf > 0.0)
          out.y[i] = g2_through_irf(tau, alpha, tau0, norm, sig);
        else
          out.y[i] = norm * (1.0 - alpha * std::exp(-std::fabs(tau) / tau0));
      }
      break;
    }
    case ScalarModel::lifetime: {
      const double tau = need(true_params, "tau_ns");
      const double amp = need(true_params, "amplitude");
      const double base = opt(true_params, "baseline", 0.0);
      require(tau > 0.0 && amp > 0.0, Err::NonPositiveInput,
              "tau_ns and amplitude must be positive");
      out.x_name = "t_ns";
      out.y_name = "counts";
      for (std::size_t i = 0; i < out.x.size(); ++i)
        out.y[i] = base + amp * std::exp(-std::max(out.x[i], 0.0) / tau);
      break;
    }
  }

  apply_noise(out.y, out.sigma, noise);

  out.metadata["model"] = to_string(model);
  for (const auto& [key, val] : true_params)
    out.metadata["true_" + key] = fmt(val);
  out.metadata["noise_kind"] = to_string(noise.kind);
  if (noise.kind != NoiseKind::none) {
    out.metadata["noise_scale"] = fmt(noise.scale);
    out.metadata["noise_seed"] = std::to_string(noise.seed);
  }
  return out;
}

}  // namespace qekit::synth
