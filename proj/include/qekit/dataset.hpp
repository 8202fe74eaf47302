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

#ifndef QEKIT_DATASET_HPP
#define QEKIT_DATASET_HPP

#include <map>
#include <string>
#include <vector>

namespace qekit {

/// Generic scalar dataset (power series, temperature series, correlation
/// histogram, decay trace).  Column names travel with the data so files
/// stay self-describing.
struct XYSeries {
  std::string x_name = "x";
  std::string y_name = "y";
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;  // empty means unweighted (sigma = 1)
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return x.size(); }
  double sigma_at(std::size_t i) const { return sigma.empty() ? 1.0 : sigma[i]; }
};

XYSeries read_xy_csv(const std::string& path);
void write_xy_csv(const std::string& path, const XYSeries& d);

}  // namespace qekit

#endif  // QEKIT_DATASET_HPP
