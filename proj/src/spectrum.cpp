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

#include "qekit/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "qekit/constants.hpp"
#include "qekit/errors.hpp"

namespace qekit::spectra {

namespace {

constexpr std::size_t kMinBins = 8;

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

const char* to_string(AxisKind kind) {
  return kind == AxisKind::wavelength_nm ? "wavelength_nm" : "energy_ev";
}

AxisKind axis_kind_from_string(const std::string& s) {
  if (s == "wavelength_nm") return AxisKind::wavelength_nm;
  if (s == "energy_ev") return AxisKind::energy_ev;
  fail(Err::InvalidSpectrum, "unknown axis kind '" + s + "'");
}

Spectrum::Spectrum(AxisKind kind, std::vector<double> axis_values,
                   std::vector<double> intensity_values,
                   std::vector<double> sigma_values,
                   std::map<std::string, std::string> meta)
    : axis_kind(kind),
      axis(std::move(axis_values)),
      intensity(std::move(intensity_values)),
      sigma(std::move(sigma_values)),
      metadata(std::move(meta)) {
  require(axis.size() >= kMinBins, Err::InvalidSpectrum,
          "need at least 8 bins, got " + std::to_string(axis.size()));
  require(intensity.size() == axis.size(), Err::InvalidSpectrum,
          "intensity length does not match the axis");
  if (sigma.empty()) {
    sigma.resize(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i)
      sigma[i] = std::sqrt(std::max(intensity[i], 1.0));
  }
  require(sigma.size() == axis.size(), Err::InvalidSpectrum,
          "sigma length does not match the axis");
  if (strictly_decreasing(axis)) {
    std::reverse(axis.begin(), axis.end());
    std::reverse(intensity.begin(), intensity.end());
    std::reverse(sigma.begin(), sigma.end());
  }
  require(strictly_increasing(axis), Err::InvalidSpectrum,
          "axis must be strictly monotonic");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    require(std::isfinite(axis[i]) && std::isfinite(intensity[i]),
            Err::InvalidSpectrum, "non-finite entry at bin " + std::to_string(i));
    require(sigma[i] >= 0.0 && std::isfinite(sigma[i]), Err::InvalidSpectrum,
            "sigma must be finite and non-negative");
  }
}

bool Spectrum::calibrated() const {
  auto it = metadata.find("calibrated");
  return it != metadata.end() && it->second == "true";
}

EfficiencyCurve::EfficiencyCurve(std::vector<double> wl, std::vector<double> eff)
    : wavelength_nm(std::move(wl)), efficiency(std::move(eff)) {
  require(wavelength_nm.size() >= 2, Err::InvalidSpectrum,
          "efficiency curve needs at least 2 samples");
  require(wavelength_nm.size() == efficiency.size(), Err::InvalidSpectrum,
          "efficiency length does not match the wavelength grid");
  require(strictly_increasing(wavelength_nm), Err::InvalidSpectrum,
          "efficiency wavelengths must be strictly increasing");
  for (double e : efficiency)
    require(e > 0.0 && std::isfinite(e), Err::InvalidSpectrum,
            "efficiency values must be positive");
}

bool EfficiencyCurve::covers(double lo_nm, double hi_nm) const {
  return !wavelength_nm.empty() && wavelength_nm.front() <= lo_nm &&
         wavelength_nm.back() >= hi_nm;
}

double EfficiencyCurve::at(double nm) const {
  require(nm >= wavelength_nm.front() && nm <= wavelength_nm.back(),
          Err::AxisNotCovered, "wavelength outside the efficiency curve");
  auto it = std::upper_bound(wavelength_nm.begin(), wavelength_nm.end(), nm);
  if (it == wavelength_nm.end()) return efficiency.back();
  if (it == wavelength_nm.begin()) return efficiency.front();
  std::size_t hi = static_cast<std::size_t>(it - wavelength_nm.begin());
  std::size_t lo = hi - 1;
  double t = (nm - wavelength_nm[lo]) / (wavelength_nm[hi] - wavelength_nm[lo]);
  return (1.0 - t) * efficiency[lo] + t * efficiency[hi];
}

Spectrum calibrate(const Spectrum& s, const EfficiencyCurve& curve) {
  require(s.axis_kind == AxisKind::wavelength_nm, Err::NotWavelengthDomain,
          "calibration applies to wavelength-domain spectra");
  require(!s.calibrated(), Err::AlreadyCalibrated,
          "spectrum is already efficiency-corrected");
  require(curve.covers(s.axis.front(), s.axis.back()), Err::AxisNotCovered,
          "efficiency curve does not span the spectrum axis");
  Spectrum out = s;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double eff = curve.at(out.axis[i]);
    out.intensity[i] /= eff;
    out.sigma[i] /= eff;
  }
  out.metadata["calibrated"] = "true";
  return out;
}

Spectrum to_energy(const Spectrum& s) {
  require(s.axis_kind == AxisKind::wavelength_nm, Err::NotWavelengthDomain,
          "spectrum is not in the wavelength domain");
  const double hc = constants::hc_ev_nm;
  Spectrum out = s;
  out.axis_kind = AxisKind::energy_ev;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double wl = s.axis[i];
    require(wl > 0.0, Err::NonPositiveWavelength,
            "wavelength must be positive, got " + std::to_string(wl));
    double jac = wl * wl / hc;  // dlambda/dE, preserves integrated counts
    out.axis[i] = hc / wl;
    out.intensity[i] = s.intensity[i] * jac;
    out.sigma[i] = s.sigma[i] * jac;
  }
  std::reverse(out.axis.begin(), out.axis.end());
  std::reverse(out.intensity.begin(), out.intensity.end());
  std::reverse(out.sigma.begin(), out.sigma.end());
  return out;
}

Lineshape to_lineshape(const Spectrum& s, double e_zpl_hint_ev) {
  require(s.axis_kind == AxisKind::energy_ev, Err::NotEnergyDomain,
          "lineshape extraction needs an energy-domain spectrum");
  Lineshape out;
  out.e_zpl_hint_ev = e_zpl_hint_ev;
  out.delta_e_ev.resize(s.size());
  out.density.resize(s.size());
  out.sigma.resize(s.size());
  // dE = hint - E flips the axis, so fill in reverse to stay ascending.
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t j = s.size() - 1 - i;
    double e = s.axis[j];
    require(e > 0.0, Err::ZeroEnergyBin,
            "energy bins must be positive for the E^3 scaling");
    double e3 = e * e * e;
    out.delta_e_ev[i] = e_zpl_hint_ev - e;
    out.density[i] = s.intensity[j] / e3;
    out.sigma[i] = s.sigma[j] / e3;
  }
  return out;
}

namespace {

// Source bin edges: midpoints between samples, end bins mirrored.
std::vector<double> source_edges(const std::vector<double>& centers) {
  std::vector<double> e(centers.size() + 1);
  for (std::size_t i = 1; i < centers.size(); ++i)
    e[i] = 0.5 * (centers[i - 1] + centers[i]);
  e.front() = centers.front() - (e[1] - centers.front());
  e.back() = centers.back() + (centers.back() - e[centers.size() - 1]);
  return e;
}

void check_target_edges(const Spectrum& s, const std::vector<double>& edges,
                        const std::vector<double>& src) {
  require(edges.size() >= 2, Err::NonMonotonicEdges,
          "need at least 2 target edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    require(edges[i] > edges[i - 1], Err::NonMonotonicEdges,
            "target edges must be strictly increasing");
  require(edges.front() >= src.front() - 1e-9 * (src.back() - src.front()) &&
              edges.back() <= src.back() + 1e-9 * (src.back() - src.front()),
          Err::EdgesOutOfRange, "target edges extend beyond the source range");
  (void)s;
}

}  // namespace

Spectrum rebin(const Spectrum& s, const std::vector<double>& edges) {
  const std::vector<double> src = source_edges(s.axis);
  check_target_edges(s, edges, src);

  const std::size_t nt = edges.size() - 1;
  std::vector<double> counts(nt, 0.0), var(nt, 0.0), centers(nt);
  for (std::size_t t = 0; t < nt; ++t)
    centers[t] = 0.5 * (edges[t] + edges[t + 1]);

  for (std::size_t k = 0; k < s.size(); ++k) {
    const double a = src[k], b = src[k + 1];
    const double width = b - a;
    // Walk the target bins overlapping [a, b).
    auto it = std::upper_bound(edges.begin(), edges.end(), a);
    std::size_t t = (it == edges.begin())
                        ? 0
                        : static_cast<std::size_t>(it - edges.begin()) - 1;
    for (; t < nt && edges[t] < b; ++t) {
      double lo = std::max(a, edges[t]);
      double hi = std::min(b, edges[t + 1]);
      if (hi <= lo) continue;
      double frac = (hi - lo) / width;
      counts[t] += s.intensity[k] * frac;
      var[t] += s.sigma[k] * s.sigma[k] * frac * frac;
    }
  }

  std::vector<double> sig(nt);
  for (std::size_t t = 0; t < nt; ++t) sig[t] = std::sqrt(var[t]);
  Spectrum out(s.axis_kind, std::move(centers), std::move(counts),
               std::move(sig), s.metadata);
  return out;
}

std::vector<double> equal_count_edges(const Spectrum& s, double target_counts) {
  require(target_counts > 0.0, Err::NonPositiveInput,
          "target counts per bin must be positive");
  const std::vector<double> src = source_edges(s.axis);
  double total = 0.0;
  for (double v : s.intensity) total += std::max(v, 0.0);
  require(total > 0.0, Err::AllZeroIntensity,
          "cannot rebin a spectrum with no positive counts");

  // Edges only at source-sample boundaries: splitting a single sample would
  // fabricate sub-bins with duplicated values and correlated "independent"
  // sigmas.  A sample holding >= target_counts becomes a bin of its own.
  std::vector<double> edges;
  edges.push_back(src.front());
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    acc += std::max(s.intensity[k], 0.0);
    if (acc >= target_counts) {
      edges.push_back(src[k + 1]);
      acc = 0.0;
    }
  }
  if (edges.back() < src.back()) {
    // Merge a trailing partial bin unless it is the only one.
    if (edges.size() > 1 && acc < 0.5 * target_counts) edges.pop_back();
    edges.push_back(src.back());
  }
  return edges;
}

Spectrum rebin_density(const Spectrum& s, const std::vector<double>& edges) {
  Spectrum binned = rebin(s, edges);
  for (std::size_t t = 0; t + 1 < edges.size(); ++t) {
    double w = edges[t + 1] - edges[t];
    binned.intensity[t] /= w;
    binned.sigma[t] /= w;
  }
  return binned;
}

}  // namespace qekit::spectra
