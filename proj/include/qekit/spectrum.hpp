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

#ifndef QEKIT_SPECTRUM_HPP
#define QEKIT_SPECTRUM_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qekit::spectra {

enum class AxisKind { wavelength_nm, energy_ev };

const char* to_string(AxisKind kind);
AxisKind axis_kind_from_string(const std::string& s);

/// A measured emission spectrum.  The axis is kept strictly ascending; a
/// strictly descending input is reversed on construction.  Intensities are
/// detector counts (or a count-proportional density) per bin, sigma the
/// one-standard-deviation uncertainty per bin.  When sigma is not supplied
/// the Poisson floor sqrt(max(counts, 1)) is assumed.
struct Spectrum {
  AxisKind axis_kind = AxisKind::wavelength_nm;
  std::vector<double> axis;
  std::vector<double> intensity;
  std::vector<double> sigma;
  std::map<std::string, std::string> metadata;

  Spectrum() = default;
  Spectrum(AxisKind kind, std::vector<double> axis_values,
           std::vector<double> intensity_values,
           std::vector<double> sigma_values = {},
           std::map<std::string, std::string> meta = {});

  std::size_t size() const { return axis.size(); }
  bool calibrated() const;
};

/// Relative detection efficiency sampled on an ascending wavelength grid,
/// interpolated linearly in between.
struct EfficiencyCurve {
  std::vector<double> wavelength_nm;
  std::vector<double> efficiency;

  EfficiencyCurve() = default;
  EfficiencyCurve(std::vector<double> wl, std::vector<double> eff);

  bool covers(double lo_nm, double hi_nm) const;
  double at(double nm) const;
};

/// Emission density against the energy offset dE = E_zpl_hint - E, ascending
/// in dE so the phonon sideband sits at positive offsets.
struct Lineshape {
  double e_zpl_hint_ev = 0.0;
  std::vector<double> delta_e_ev;
  std::vector<double> density;
  std::vector<double> sigma;

  std::size_t size() const { return delta_e_ev.size(); }
};

/// Divides intensities (and sigmas) by the interpolated relative efficiency.
/// Throws AxisNotCovered when the curve does not span the spectrum and
/// AlreadyCalibrated on a second application.
Spectrum calibrate(const Spectrum& s, const EfficiencyCurve& curve);

/// Converts a wavelength-domain spectrum to the energy domain, E = hc /
/// lambda, applying the Jacobian lambda^2 / hc so integrated intensity is
/// preserved.  The result is re-sorted ascending in energy.
Spectrum to_energy(const Spectrum& s);

/// Divides an energy-domain spectrum by E^3 and rebases it onto the offset
/// axis dE = e_zpl_hint - E.  No normalization is applied.
Lineshape to_lineshape(const Spectrum& s, double e_zpl_hint_ev);

/// Rebins counts onto the given target bin edges by fractional overlap of
/// the source bins (edges at midpoints between samples).  Sigmas combine in
/// quadrature with the same fractions; total counts over full coverage are
/// conserved.  The returned axis holds target bin centers.
Spectrum rebin(const Spectrum& s, const std::vector<double>& edges);

/// Bin edges that give roughly `target_counts` summed counts per bin.  Edges
/// fall on source-sample boundaries only, so a bright sample is never split
/// into correlated sub-bins.  Used to downsample dense spectra before
/// fitting.
std::vector<double> equal_count_edges(const Spectrum& s, double target_counts);

/// Rebins to the given edges and converts the summed counts back to a
/// density (counts per axis unit) at the bin centroid, so variable-width
/// bins remain comparable.
Spectrum rebin_density(const Spectrum& s, const std::vector<double>& edges);

/// CSV with a `axis,intensity[,sigma]` header, `#`-prefixed comments and
/// `# key=value` metadata lines.  `axis_kind` metadata selects the domain.
Spectrum read_spectrum_csv(const std::string& path);
void write_spectrum_csv(const std::string& path, const Spectrum& s);

}  // namespace qekit::spectra

#endif  // QEKIT_SPECTRUM_HPP
