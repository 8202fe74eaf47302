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

#include "qekit/errors.hpp"

namespace qekit {

const char* to_string(Err code) {
  switch (code) {
    case Err::InvalidSpectrum: return "InvalidSpectrum";
    case Err::AxisNotCovered: return "AxisNotCovered";
    case Err::AlreadyCalibrated: return "AlreadyCalibrated";
    case Err::NonPositiveWavelength: return "NonPositiveWavelength";
    case Err::ZeroEnergyBin: return "ZeroEnergyBin";
    case Err::EdgesOutOfRange: return "EdgesOutOfRange";
    case Err::NonMonotonicEdges: return "NonMonotonicEdges";
    case Err::NotWavelengthDomain: return "NotWavelengthDomain";
    case Err::NotEnergyDomain: return "NotEnergyDomain";
    case Err::NonPositiveEnergy: return "NonPositiveEnergy";
    case Err::NonPositiveTemperature: return "NonPositiveTemperature";
    case Err::EmptySpectralFunction: return "EmptySpectralFunction";
    case Err::NegativeHuangRhys: return "NegativeHuangRhys";
    case Err::NonConvergence: return "NonConvergence";
    case Err::DegenerateData: return "DegenerateData";
    case Err::DegenerateSeries: return "DegenerateSeries";
    case Err::NoPeakFound: return "NoPeakFound";
    case Err::IrfExceedsRaw: return "IrfExceedsRaw";
    case Err::InsufficientSpan: return "InsufficientSpan";
    case Err::NegativeWidthInput: return "NegativeWidthInput";
    case Err::AllZeroIntensity: return "AllZeroIntensity";
    case Err::UnnormalizedHistogram: return "UnnormalizedHistogram";
    case Err::NonPositiveInput: return "NonPositiveInput";
    case Err::BandOutOfRange: return "BandOutOfRange";
    case Err::EmptyCube: return "EmptyCube";
    case Err::TooFewEmitters: return "TooFewEmitters";
    case Err::UnknownModel: return "UnknownModel";
    case Err::IoError: return "IoError";
    case Err::UsageError: return "UsageError";
    case Err::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace qekit
