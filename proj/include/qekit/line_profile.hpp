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

#ifndef QEKIT_LINE_PROFILE_HPP
#define QEKIT_LINE_PROFILE_HPP

#include <cmath>
#include <string>

#include "qekit/errors.hpp"

namespace qekit {

enum class ZplShape { lorentzian, gaussian };

const char* to_string(ZplShape s);
ZplShape zpl_shape_from_string(const std::string& s);

inline constexpr double kGaussFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

/// Unit-area line profile centered at zero, parameterized by FWHM.
/// Besides the density it exposes the two antiderivatives needed to
/// integrate a piecewise-linear function against the profile exactly:
///   cdf(u)     = int_{-inf}^{u} pdf
///   moment1(u) = int t * pdf(t) dt   (no integration constant)
/// and the FWHM derivatives of both for analytic Jacobians.
struct LineProfile {
  ZplShape shape = ZplShape::lorentzian;
  double fwhm = 1.0;

  LineProfile(ZplShape sh, double width) : shape(sh), fwhm(width) {
    require(width > 0.0 && std::isfinite(width), Err::NonPositiveInput,
            "profile FWHM must be positive");
  }

  double scale() const {  // HWHM for Lorentzian, sigma for Gaussian
    return shape == ZplShape::lorentzian ? 0.5 * fwhm
                                         : fwhm / kGaussFwhmPerSigma;
  }

  double pdf(double u) const {
    const double w = scale();
    if (shape == ZplShape::lorentzian)
      return w / (M_PI * (u * u + w * w));
    const double z = u / w;
    return std::exp(-0.5 * z * z) / (w * std::sqrt(2.0 * M_PI));
  }

  double cdf(double u) const {
    const double w = scale();
    if (shape == ZplShape::lorentzian)
      return 0.5 + std::atan(u / w) / M_PI;
    return 0.5 * std::erfc(-u / (w * std::sqrt(2.0)));
  }

  double moment1(double u) const {
    const double w = scale();
    if (shape == ZplShape::lorentzian)
      return w / (2.0 * M_PI) * std::log(u * u + w * w);
    return -w * w * pdf(u);
  }

  double dpdf_du(double u) const {
    const double w = scale();
    if (shape == ZplShape::lorentzian)
      return -2.0 * u / (u * u + w * w) * pdf(u);
    return -u / (w * w) * pdf(u);
  }

  double dcdf_dfwhm(double u) const {
    const double w = scale();
    return -(u / w) * pdf(u) * dscale_dfwhm();
  }

  double dmoment1_dfwhm(double u) const {
    const double w = scale();
    double d;
    if (shape == ZplShape::lorentzian)
      d = moment1(u) / w + w * pdf(u);
    else
      d = -pdf(u) * (u * u / w + w);
    return d * dscale_dfwhm();
  }

  double dpdf_dfwhm(double u) const {
    const double w = scale();
    double d;
    if (shape == ZplShape::lorentzian)
      d = pdf(u) * (1.0 / w - 2.0 * w / (u * u + w * w));
    else
      d = pdf(u) * (u * u / (w * w * w) - 1.0 / w);
    return d * dscale_dfwhm();
  }

 private:
  double dscale_dfwhm() const {
    return shape == ZplShape::lorentzian ? 0.5 : 1.0 / kGaussFwhmPerSigma;
  }
};

}  // namespace qekit

#endif  // QEKIT_LINE_PROFILE_HPP
