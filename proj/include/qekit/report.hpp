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

#ifndef QEKIT_REPORT_HPP
#define QEKIT_REPORT_HPP

#include <string>
#include <vector>

#include "json.hpp"
#include "qekit/photophysics.hpp"
#include "qekit/survey.hpp"
#include "qekit/vibronic.hpp"

namespace qekit::report {

using json = nlohmann::ordered_json;

json vibronic_report(const vibronic::VibronicFit& fit);
json temperature_series_report(const vibronic::TemperatureSeriesFit& fit);
json peak_report(const photo::PeakFit& fit);
json power_report(const photo::PowerBroadeningFit& fit);
json temp_broadening_report(const photo::TemperatureBroadeningFit& fit);
json saturation_report(const photo::SaturationFit& fit);
json g2_report(const photo::G2Fit& fit);
json lifetime_report(const photo::LifetimeFit& fit);
json survey_report(const std::vector<survey::EmitterRecord>& records,
                   const survey::ZplDistribution* dist);

/// Writes with a trailing newline; no timestamps, so identical inputs give
/// byte-identical files.
void write_json(const std::string& path, const json& j);

/// One plotted series.  Every curve carries its source values in data units
/// as `data-x`/`data-y` attributes so downstream checks can read back what
/// was plotted without undoing the pixel transform.
struct Curve {
  std::string id;
  std::vector<double> x, y;
  std::string color = "#000000";
  bool points_only = false;
};

void write_svg(const std::string& path, const std::vector<Curve>& curves,
               const std::string& x_label, const std::string& y_label,
               const std::string& title = "");

}  // namespace qekit::report

#endif  // QEKIT_REPORT_HPP
