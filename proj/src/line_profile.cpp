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

#include "qekit/line_profile.hpp"

namespace qekit {

const char* to_string(ZplShape s) {
  return s == ZplShape::lorentzian ? "lorentzian" : "gaussian";
}

ZplShape zpl_shape_from_string(const std::string& s) {
  if (s == "lorentzian") return ZplShape::lorentzian;
  if (s == "gaussian") return ZplShape::gaussian;
  fail(Err::UnknownModel, "unknown line shape '" + s + "'");
}

}  // namespace qekit
