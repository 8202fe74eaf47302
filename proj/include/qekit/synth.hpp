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

#ifndef QEKIT_SYNTH_HPP
#define QEKIT_SYNTH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qekit/dataset.hpp"
#include "qekit/rng.hpp"
#include "qekit/spectrum.hpp"
#include "qekit/vibronic.hpp"

namespace qekit::synth {

enum class NoiseKind { none, poisson, gaussian };

const char* to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

/// For poisson noise `scale` is the peak count level the noiseless curve is
/// scaled to before sampling; for gaussian it is the additive sigma in the
/// output units.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double scale = 1e4;
  std::uint64_t seed = 0;
};

enum class ScalarModel {
  power_broadening,
  temperature_broadening,
  saturation,
  g2,
  lifetime,
};

const char* to_string(ScalarModel m);
ScalarModel scalar_model_from_string(const std::string& s);

/// Synthetic wavelength-domain spectrum of the vibronic emission model,
/// scaled to `peak_counts` at the maximum (poisson noise uses its own scale
/// instead).  Ground truth is recorded as true_* metadata entries.
spectra::Spectrum gen_vibronic_spectrum(const vibronic::VibronicParams& p,
                                        const std::vector<double>& wavelength_nm,
                                        const NoiseModel& noise,
                                        double peak_counts = 1e4);

/// Scalar forward models evaluated at the sample points, with the model
/// formulas written out independently of the fitters.  Parameter keys:
///   power_broadening:       gamma0_ev, p0
///   temperature_broadening: gamma0_ev, a_ev_per_k, b_ev_per_k5
///   saturation:             i_sat, p_sat, slope (optional)
///   g2:                     alpha, tau0_ns, norm (optional),
///                           irf_fwhm_ns (optional)
///   lifetime:               tau_ns, amplitude, baseline (optional)
XYSeries gen_scalar_dataset(ScalarModel model,
                            const std::map<std::string, double>& true_params,
                            const std::vector<double>& sample_points,
                            const NoiseModel& noise);

}  // namespace qekit::synth

#endif  // QEKIT_SYNTH_HPP
