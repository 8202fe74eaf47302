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

#ifndef QEKIT_SURVEY_HPP
#define QEKIT_SURVEY_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "qekit/photophysics.hpp"
#include "qekit/spectrum.hpp"

namespace qekit::survey {

/// Confocal scan with a full spectrum per pixel.  Data is stored row-major
/// in (y, x, wavelength) order.
struct HyperspectralCube {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> wavelengths_nm;
  std::vector<double> data;
  double pixel_pitch_um = 0.0;  // 0 = unknown

  std::size_t bands() const { return wavelengths_nm.size(); }
  double& at(std::size_t y, std::size_t x, std::size_t l) {
    return data[(y * nx + x) * bands() + l];
  }
  double at(std::size_t y, std::size_t x, std::size_t l) const {
    return data[(y * nx + x) * bands() + l];
  }
  void validate() const;
  /// Wavelength-domain spectrum of one pixel.
  spectra::Spectrum pixel_spectrum(std::size_t y, std::size_t x) const;
};

/// QEHC v1: <name>.qehc.json sidecar (nx, ny, wavelengths, dtype "f64le",
/// data file) next to a flat little-endian binary64 data file.
HyperspectralCube load_cube(const std::string& path);
void save_cube(const std::string& sidecar_path, const HyperspectralCube& cube);

/// Directory of per-pixel CSVs named px_<y>_<x>.csv (small cubes only).
HyperspectralCube load_cube_csv_dir(const std::string& dir);

struct EmitterRecord {
  std::size_t x = 0;
  std::size_t y = 0;
  double snr = 0.0;
  spectra::Spectrum spectrum;
  double zpl_nm = 0.0;
  photo::PeakFit peak;
};

/// Band-integrated hotspot detection: integrate over [band_lo, band_hi],
/// smooth with a 1-pixel Gaussian (periodic boundaries), keep strict local
/// maxima above median + min_snr * MAD, then greedily enforce the minimum
/// pairwise separation, brightest first.  Surviving pixels get a spectrum
/// and a ZPL peak fit; records are ordered by descending SNR, then (y, x).
std::vector<EmitterRecord> detect_emitters(const HyperspectralCube& cube,
                                           double band_lo_nm,
                                           double band_hi_nm, double min_snr,
                                           double min_separation_px);

struct ZplDistribution {
  std::vector<double> values_nm;
  double mean_nm = 0.0;
  double sigma_nm = 0.0;
  double mean_sigma_nm = 0.0;   // standard error of the mean
  double sigma_sigma_nm = 0.0;  // standard error of sigma
  std::vector<double> bin_edges_nm;
  std::vector<std::size_t> counts;
  bool degenerate = false;  // zero variance input
};

/// Histogram plus unbinned maximum-likelihood Gaussian fit of the emitter
/// ZPL wavelengths.
ZplDistribution zpl_distribution(const std::vector<EmitterRecord>& records,
                                 double bin_width_nm);

}  // namespace qekit::survey

#endif  // QEKIT_SURVEY_HPP
