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

#ifndef QEKIT_ERRORS_HPP
#define QEKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qekit {

/// Machine-checkable failure categories for every throwing operation in the
/// library.  CLI maps input/format categories to exit code 2.
enum class Err {
  // spectra-core
  InvalidSpectrum,
  AxisNotCovered,
  AlreadyCalibrated,
  NonPositiveWavelength,
  ZeroEnergyBin,
  EdgesOutOfRange,
  NonMonotonicEdges,
  NotWavelengthDomain,
  NotEnergyDomain,
  // vibronic
  NonPositiveEnergy,
  NonPositiveTemperature,
  EmptySpectralFunction,
  NegativeHuangRhys,
  NonConvergence,
  DegenerateData,
  DegenerateSeries,
  // photophysics
  NoPeakFound,
  IrfExceedsRaw,
  InsufficientSpan,
  NegativeWidthInput,
  AllZeroIntensity,
  UnnormalizedHistogram,
  NonPositiveInput,
  // survey
  BandOutOfRange,
  EmptyCube,
  TooFewEmitters,
  // synth
  UnknownModel,
  // cli / io
  IoError,
  UsageError,
  ConfigError,
};

const char* to_string(Err code);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, Err code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace qekit

#endif  // QEKIT_ERRORS_HPP
