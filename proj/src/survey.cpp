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

#include "qekit/survey.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>

#include "json.hpp"
#include "qekit/constants.hpp"
#include "qekit/errors.hpp"
#include "qekit/numerics.hpp"
#include "qekit/parallel.hpp"

namespace qekit::survey {

namespace fs = std::filesystem;

void HyperspectralCube::validate() const {
  require(nx > 0 && ny > 0 && bands() > 0, Err::EmptyCube,
          "cube has no pixels or no wavelength samples");
  require(data.size() == nx * ny * bands(), Err::InvalidSpectrum,
          "cube data size does not match nx * ny * bands");
  for (std::size_t i = 1; i < wavelengths_nm.size(); ++i)
    require(wavelengths_nm[i] > wavelengths_nm[i - 1], Err::NonMonotonicEdges,
            "cube wavelengths must be strictly increasing");
  for (double v : data)
    require(std::isfinite(v) && v >= 0.0, Err::InvalidSpectrum,
            "cube intensities must be finite and non-negative");
}

spectra::Spectrum HyperspectralCube::pixel_spectrum(std::size_t y,
                                                    std::size_t x) const {
  std::vector<double> counts(bands());
  for (std::size_t l = 0; l < bands(); ++l) counts[l] = at(y, x, l);
  spectra::Spectrum s(spectra::AxisKind::wavelength_nm, wavelengths_nm,
                      std::move(counts));
  s.metadata["pixel_x"] = std::to_string(x);
  s.metadata["pixel_y"] = std::to_string(y);
  s.metadata["calibrated"] = "true";
  return s;
}

HyperspectralCube load_cube(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Err::IoError, "cannot open cube sidecar: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(Err::IoError, "bad cube sidecar " + path + ": " + e.what());
  }
  for (const char* key : {"nx", "ny", "wavelengths", "dtype", "data"})
    require(j.contains(key), Err::IoError,
            std::string("cube sidecar missing key: ") + key);
  require(j["dtype"].get<std::string>() == "f64le", Err::IoError,
          "unsupported cube dtype (expect f64le)");

  HyperspectralCube cube;
  cube.nx = j["nx"].get<std::size_t>();
  cube.ny = j["ny"].get<std::size_t>();
  cube.wavelengths_nm = j["wavelengths"].get<std::vector<double>>();
  if (j.contains("pixel_pitch_um"))
    cube.pixel_pitch_um = j["pixel_pitch_um"].get<double>();

  const fs::path data_path =
      fs::path(path).parent_path() / j["data"].get<std::string>();
  std::ifstream bin(data_path, std::ios::binary);
  require(bin.good(), Err::IoError,
          "cannot open cube data: " + data_path.string());
  const std::size_t n = cube.nx * cube.ny * cube.bands();
  std::vector<char> raw(n * sizeof(double));
  bin.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  require(static_cast<std::size_t>(bin.gcount()) == raw.size() &&
              bin.peek() == EOF,
          Err::IoError, "cube data size mismatch: " + data_path.string());
  cube.data.resize(n);
  // Stored little-endian; this decodes natively on little-endian hosts.
  std::memcpy(cube.data.data(), raw.data(), raw.size());
  cube.validate();
  return cube;
}

void save_cube(const std::string& sidecar_path,
               const HyperspectralCube& cube) {
  cube.validate();
  fs::path side(sidecar_path);
  fs::path data_path = side;
  data_path.replace_extension(".bin");  // foo.qehc.json -> foo.qehc.bin
  nlohmann::ordered_json j;
  j["nx"] = cube.nx;
  j["ny"] = cube.ny;
  j["wavelengths"] = cube.wavelengths_nm;
  j["dtype"] = "f64le";
  j["data"] = data_path.filename().string();
  if (cube.pixel_pitch_um > 0.0) j["pixel_pitch_um"] = cube.pixel_pitch_um;
  std::ofstream out(side);
  require(out.good(), Err::IoError, "cannot write " + sidecar_path);
  out << j.dump(2) << '\n';
  std::ofstream bin(data_path, std::ios::binary);
  require(bin.good(), Err::IoError, "cannot write " + data_path.string());
  bin.write(reinterpret_cast<const char*>(cube.data.data()),
            static_cast<std::streamsize>(cube.data.size() * sizeof(double)));
  require(bin.good(), Err::IoError, "short write to " + data_path.string());
}

HyperspectralCube load_cube_csv_dir(const std::string& dir) {
  require(fs::is_directory(dir), Err::IoError, "not a directory: " + dir);
  const std::regex name_re(R"(px_(\d+)_(\d+)\.csv)");
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, fs::path>> files;
  std::size_t ny = 0, nx = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, name_re)) continue;
    const std::size_t y = std::stoul(m[1]);
    const std::size_t x = std::stoul(m[2]);
    ny = std::max(ny, y + 1);
    nx = std::max(nx, x + 1);
    files.push_back({{y, x}, entry.path()});
  }
  require(!files.empty(), Err::EmptyCube,
          "no px_<y>_<x>.csv files in " + dir);

  HyperspectralCube cube;
  cube.ny = ny;
  cube.nx = nx;
  std::vector<bool> seen(ny * nx, false);
  for (const auto& [yx, p] : files) {
    spectra::Spectrum s = spectra::read_spectrum_csv(p.string());
    require(s.axis_kind == spectra::AxisKind::wavelength_nm,
            Err::NotWavelengthDomain,
            "per-pixel CSVs must be wavelength spectra: " + p.string());
    if (cube.wavelengths_nm.empty()) {
      cube.wavelengths_nm = s.axis;
      cube.data.assign(ny * nx * cube.bands(), 0.0);
    }
    require(s.axis == cube.wavelengths_nm, Err::IoError,
            "per-pixel wavelength grids differ: " + p.string());
    const auto [y, x] = yx;
    for (std::size_t l = 0; l < cube.bands(); ++l)
      cube.at(y, x, l) = s.intensity[l];
    seen[y * nx + x] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    require(seen[i], Err::IoError,
            "missing per-pixel CSV for pixel index " + std::to_string(i));
  cube.validate();
  return cube;
}

namespace {

// Separable Gaussian blur (sigma = 1 px, radius 4) with periodic wrap;
// periodicity keeps detection exactly translation-equivariant.
std::vector<double> smooth_periodic(const std::vector<double>& img,
                                    std::size_t ny, std::size_t nx) {
  constexpr int radius = 4;
  double kernel[2 * radius + 1];
  double ksum = 0.0;
  for (int r = -radius; r <= radius; ++r) {
    kernel[r + radius] = std::exp(-0.5 * r * r);
    ksum += kernel[r + radius];
  }
  for (double& k : kernel) k /= ksum;

  std::vector<double> tmp(img.size()), out(img.size());
  const auto nxi = static_cast<long long>(nx);
  const auto nyi = static_cast<long long>(ny);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (int r = -radius; r <= radius; ++r) {
        const long long xx =
            (static_cast<long long>(x) + r % nxi + nxi) % nxi;
        acc += kernel[r + radius] * img[y * nx + static_cast<std::size_t>(xx)];
      }
      tmp[y * nx + x] = acc;
    }
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (int r = -radius; r <= radius; ++r) {
        const long long yy =
            (static_cast<long long>(y) + r % nyi + nyi) % nyi;
        acc += kernel[r + radius] * tmp[static_cast<std::size_t>(yy) * nx + x];
      }
      out[y * nx + x] = acc;
    }
  return out;
}

double torus_distance(std::size_t x1, std::size_t y1, std::size_t x2,
                      std::size_t y2, std::size_t nx, std::size_t ny) {
  const double dx0 = std::fabs(static_cast<double>(x1) - static_cast<double>(x2));
  const double dy0 = std::fabs(static_cast<double>(y1) - static_cast<double>(y2));
  const double dx = std::min(dx0, static_cast<double>(nx) - dx0);
  const double dy = std::min(dy0, static_cast<double>(ny) - dy0);
  return std::hypot(dx, dy);
}

}  // namespace

std::vector<EmitterRecord> detect_emitters(const HyperspectralCube& cube,
                                           double band_lo_nm,
                                           double band_hi_nm, double min_snr,
                                           double min_separation_px) {
  cube.validate();
  require(min_snr > 0.0, Err::NonPositiveInput, "min_snr must be positive");
  require(min_separation_px >= 1.0, Err::NonPositiveInput,
          "min_separation_px must be at least 1");
  const auto& wl = cube.wavelengths_nm;
  require(band_lo_nm < band_hi_nm && band_lo_nm >= wl.front() &&
              band_hi_nm <= wl.back(),
          Err::BandOutOfRange, "integration band must lie inside the cube's "
                               "wavelength range");

  std::size_t i0 = 0;
  while (wl[i0] < band_lo_nm) ++i0;
  std::size_t i1 = wl.size() - 1;
  while (wl[i1] > band_hi_nm) --i1;
  require(i1 > i0, Err::BandOutOfRange,
          "band narrower than the wavelength sampling");

  const std::size_t nx = cube.nx, ny = cube.ny;
  std::vector<double> img(nx * ny, 0.0);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (std::size_t l = i0; l + 1 <= i1; ++l)
        acc += 0.5 * (cube.at(y, x, l) + cube.at(y, x, l + 1)) *
               (wl[l + 1] - wl[l]);
      img[y * nx + x] = acc;
    }

  const std::vector<double> sm = smooth_periodic(img, ny, nx);
  const double med = median(sm);
  const double mad = mad_sigma(sm);
  if (mad <= 0.0) return {};  // flat map, no noise scale to detect against
  const double threshold = med + min_snr * mad;

  struct Candidate {
    double value;
    std::size_t y, x;
  };
  std::vector<Candidate> cands;
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      const double v = sm[y * nx + x];
      if (v <= threshold) continue;
      bool is_max = true;
      for (long long dy = -1; dy <= 1 && is_max; ++dy)
        for (long long dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const auto xx = static_cast<std::size_t>(
              (static_cast<long long>(x) + dx + static_cast<long long>(nx)) %
              static_cast<long long>(nx));
          const auto yy = static_cast<std::size_t>(
              (static_cast<long long>(y) + dy + static_cast<long long>(ny)) %
              static_cast<long long>(ny));
          if (sm[yy * nx + xx] >= v) {
            is_max = false;
            break;
          }
        }
      if (is_max) cands.push_back({v, y, x});
    }

  std::sort(cands.begin(), cands.end(), [](const Candidate& a,
                                           const Candidate& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  std::vector<Candidate> kept;
  for (const auto& c : cands) {
    bool clear = true;
    for (const auto& k : kept)
      if (torus_distance(c.x, c.y, k.x, k.y, nx, ny) < min_separation_px) {
        clear = false;
        break;
      }
    if (clear) kept.push_back(c);
  }

  std::vector<EmitterRecord> records(kept.size());
  std::vector<char> ok(kept.size(), 0);
  parallel_for(kept.size(), [&](std::size_t i) {
    const auto& c = kept[i];
    EmitterRecord& rec = records[i];
    rec.x = c.x;
    rec.y = c.y;
    rec.snr = (c.value - med) / mad;
    try {
      rec.spectrum = cube.pixel_spectrum(c.y, c.x);
      spectra::Spectrum es = spectra::to_energy(rec.spectrum);
      rec.peak = photo::fit_peak(es, ZplShape::lorentzian);
      rec.zpl_nm = constants::hc_ev_nm / rec.peak.center_ev;
      ok[i] = 1;
    } catch (const Error&) {
      ok[i] = 0;  // hotspot without a fittable line; dropped below
    }
  });

  std::vector<EmitterRecord> out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (ok[i]) out.push_back(std::move(records[i]));
  return out;
}

ZplDistribution zpl_distribution(const std::vector<EmitterRecord>& records,
                                 double bin_width_nm) {
  require(records.size() >= 5, Err::TooFewEmitters,
          "need at least 5 emitters for population statistics");
  require(bin_width_nm > 0.0, Err::NonPositiveInput,
          "bin width must be positive");

  ZplDistribution out;
  out.values_nm.reserve(records.size());
  for (const auto& r : records) out.values_nm.push_back(r.zpl_nm);
  const double n = static_cast<double>(out.values_nm.size());

  double mean = 0.0;
  for (double v : out.values_nm) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : out.values_nm) var += (v - mean) * (v - mean);
  var /= n;  // maximum-likelihood estimate, not the n-1 variant
  out.mean_nm = mean;
  out.sigma_nm = std::sqrt(var);
  out.mean_sigma_nm = out.sigma_nm / std::sqrt(n);
  out.sigma_sigma_nm = out.sigma_nm / std::sqrt(2.0 * n);
  out.degenerate = out.sigma_nm == 0.0;

  const auto [mn_it, mx_it] =
      std::minmax_element(out.values_nm.begin(), out.values_nm.end());
  const double e0 = std::floor(*mn_it / bin_width_nm) * bin_width_nm;
  const std::size_t nbins = static_cast<std::size_t>(
      std::floor((*mx_it - e0) / bin_width_nm)) + 1;
  out.bin_edges_nm.resize(nbins + 1);
  for (std::size_t i = 0; i <= nbins; ++i)
    out.bin_edges_nm[i] = e0 + static_cast<double>(i) * bin_width_nm;
  out.counts.assign(nbins, 0);
  for (double v : out.values_nm) {
    auto idx = static_cast<std::size_t>((v - e0) / bin_width_nm);
    if (idx >= nbins) idx = nbins - 1;
    ++out.counts[idx];
  }
  return out;
}

}  // namespace qekit::survey
