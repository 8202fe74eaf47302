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

#include "qekit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "qekit/errors.hpp"

namespace qekit::report {

namespace {

json quality_json(const photo::FitQuality& q) {
  json j;
  j["chi2_reduced"] = q.chi2_reduced;
  j["iterations"] = q.iterations;
  j["converged"] = q.converged;
  return j;
}

json num(double v) {
  // JSON has no NaN/inf; nlohmann would emit null, make that explicit.
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

json vibronic_report(const vibronic::VibronicFit& fit) {
  const vibronic::VibronicParams& p = fit.params;
  json j;
  j["e_zpl_ev"] = p.e_zpl_ev;
  j["e_zpl_sigma_ev"] = num(fit.e_zpl_sigma);
  j["gamma_zpl_ev"] = p.gamma_zpl_ev;
  j["gamma_zpl_sigma_ev"] = num(fit.gamma_sigma);
  j["s_hr"] = p.s_hr;
  j["s_hr_sigma"] = num(fit.s_hr_sigma);
  j["temperature_k"] = p.temperature_k;
  j["zpl_shape"] = to_string(p.zpl_shape);
  j["amplitude"] = fit.amplitude;
  j["zpl_weight"] = fit.zpl_weight;
  j["chi2_reduced"] = fit.chi2_reduced;
  json psf;
  {
    json e = json::array(), v = json::array();
    for (std::size_t k = 0; k < p.psf.values.size(); ++k) {
      e.push_back(p.psf.midpoint(k));
      v.push_back(p.psf.values[k]);
    }
    psf["e_ev"] = std::move(e);
    psf["value"] = std::move(v);
  }
  j["psf"] = std::move(psf);
  {
    json arr = json::array();
    for (const auto& c : fit.components)
      arr.push_back(json{{"n", c.n}, {"weight", c.weight}});
    j["n_phonon"] = std::move(arr);
  }
  j["n_max_used"] = fit.n_max_used;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  return j;
}

json temperature_series_report(const vibronic::TemperatureSeriesFit& fit) {
  json j;
  j["s_hr_mean"] = fit.s_hr_mean;
  j["s_hr_mean_sigma"] = fit.s_hr_mean_sigma;
  j["temperature_independent"] = fit.temperature_independent;
  json arr = json::array();
  for (std::size_t i = 0; i < fit.elements.size(); ++i) {
    const auto& el = fit.elements[i];
    json e;
    e["temperature_k"] = el.temperature_k;
    e["ok"] = el.ok;
    if (el.ok) {
      e["z_score"] = num(fit.z_scores[i]);
      e["fit"] = vibronic_report(el.fit);
    } else {
      e["error"] = el.error;
    }
    arr.push_back(std::move(e));
  }
  j["elements"] = std::move(arr);
  return j;
}

json peak_report(const photo::PeakFit& fit) {
  json j;
  j["model"] = to_string(fit.shape);
  j["center_ev"] = fit.center_ev;
  j["center_sigma_ev"] = num(fit.center_sigma);
  j["fwhm_ev"] = fit.fwhm_ev;
  j["fwhm_sigma_ev"] = num(fit.fwhm_sigma);
  if (fit.fwhm_irf_corrected_ev)
    j["fwhm_irf_corrected_ev"] = *fit.fwhm_irf_corrected_ev;
  j["amplitude"] = fit.amplitude;
  j["amplitude_sigma"] = num(fit.amplitude_sigma);
  j["baseline"] = fit.baseline;
  j["baseline_sigma"] = num(fit.baseline_sigma);
  j["snr"] = num(fit.snr);
  j["quality"] = quality_json(fit.quality);
  return j;
}

json power_report(const photo::PowerBroadeningFit& fit) {
  json j;
  j["model"] = "fwhm = gamma0 * sqrt(1 + power / p0)";
  j["gamma0_ev"] = fit.gamma0;
  j["gamma0_sigma_ev"] = num(fit.gamma0_sigma);
  j["p0"] = fit.p0;
  j["p0_sigma"] = num(fit.p0_sigma);
  j["model_curve"] = fit.model;
  j["quality"] = quality_json(fit.quality);
  return j;
}

json temp_broadening_report(const photo::TemperatureBroadeningFit& fit) {
  json j;
  j["model"] = "fwhm = gamma0 + a * t + b * t^5";
  j["gamma0_ev"] = fit.gamma0;
  j["gamma0_sigma_ev"] = num(fit.gamma0_sigma);
  j["a_ev_per_k"] = fit.a;
  j["a_sigma_ev_per_k"] = num(fit.a_sigma);
  j["b_ev_per_k5"] = fit.b;
  j["b_sigma_ev_per_k5"] = num(fit.b_sigma);
  if (fit.irf_fwhm) j["irf_fwhm_ev"] = *fit.irf_fwhm;
  j["model_curve"] = fit.model;
  j["component_const"] = fit.component_const;
  j["component_linear"] = fit.component_linear;
  j["component_t5"] = fit.component_t5;
  j["quality"] = quality_json(fit.quality);
  return j;
}

json saturation_report(const photo::SaturationFit& fit) {
  json j;
  j["model"] = fit.slope ? "i = i_sat * p / (p + p_sat) + slope * p"
                         : "i = i_sat * p / (p + p_sat)";
  j["i_sat"] = fit.i_sat;
  j["i_sat_sigma"] = num(fit.i_sat_sigma);
  j["p_sat"] = fit.p_sat;
  j["p_sat_sigma"] = num(fit.p_sat_sigma);
  if (fit.slope) {
    j["slope"] = *fit.slope;
    j["slope_sigma"] = num(fit.slope_sigma.value_or(0.0));
  }
  j["model_curve"] = fit.model;
  j["quality"] = quality_json(fit.quality);
  return j;
}

json g2_report(const photo::G2Fit& fit) {
  json j;
  j["model"] = "g2 = n * (1 - alpha * exp(-|tau| / tau0))";
  j["alpha"] = fit.alpha;
  j["alpha_sigma"] = num(fit.alpha_sigma);
  j["tau0_ns"] = fit.tau0;
  j["tau0_sigma_ns"] = num(fit.tau0_sigma);
  j["normalization"] = fit.normalization;
  j["g2_zero_raw"] = fit.g2_zero_raw;
  if (fit.g2_zero_irf_corrected)
    j["g2_zero_irf_corrected"] = *fit.g2_zero_irf_corrected;
  j["model_curve"] = fit.model;
  j["quality"] = quality_json(fit.quality);
  return j;
}

json lifetime_report(const photo::LifetimeFit& fit) {
  json j;
  j["model"] = "counts = baseline + amplitude * exp(-(t - t_peak) / tau)";
  j["tau_ns"] = fit.tau;
  j["tau_sigma_ns"] = num(fit.tau_sigma);
  j["amplitude"] = fit.amplitude;
  j["amplitude_sigma"] = num(fit.amplitude_sigma);
  j["baseline"] = fit.baseline;
  j["baseline_sigma"] = num(fit.baseline_sigma);
  j["t_peak_ns"] = fit.t_peak;
  j["t_fitted_ns"] = fit.t_fitted;
  j["model_curve"] = fit.model;
  j["quality"] = quality_json(fit.quality);
  return j;
}

json survey_report(const std::vector<survey::EmitterRecord>& records,
                   const survey::ZplDistribution* dist) {
  json j;
  j["n_emitters"] = records.size();
  json arr = json::array();
  for (const auto& r : records) {
    json e;
    e["x_px"] = r.x;
    e["y_px"] = r.y;
    e["snr"] = r.snr;
    e["zpl_nm"] = r.zpl_nm;
    e["peak"] = peak_report(r.peak);
    arr.push_back(std::move(e));
  }
  j["emitters"] = std::move(arr);
  if (dist) {
    json d;
    d["mean_nm"] = dist->mean_nm;
    d["mean_sigma_nm"] = dist->mean_sigma_nm;
    d["sigma_nm"] = dist->sigma_nm;
    d["sigma_sigma_nm"] = dist->sigma_sigma_nm;
    d["degenerate"] = dist->degenerate;
    d["bin_edges_nm"] = dist->bin_edges_nm;
    d["counts"] = dist->counts;
    d["values_nm"] = dist->values_nm;
    j["zpl_distribution"] = std::move(d);
  }
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Err::IoError, "cannot open for writing: " + path);
  f << j.dump(2) << '\n';
  f.flush();
  require(f.good(), Err::IoError, "write failed: " + path);
}

namespace {

std::string dbl17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dbl2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg(const std::string& path, const std::vector<Curve>& curves,
               const std::string& x_label, const std::string& y_label,
               const std::string& title) {
  constexpr double W = 900, H = 600;
  constexpr double ml = 75, mr = 25, mt = 45, mb = 55;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& c : curves) {
    require(c.x.size() == c.y.size(), Err::UsageError,
            "curve '" + c.id + "': x/y size mismatch");
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) continue;
      xmin = std::min(xmin, c.x[i]);
      xmax = std::max(xmax, c.x[i]);
      ymin = std::min(ymin, c.y[i]);
      ymax = std::max(ymax, c.y[i]);
    }
  }
  if (!(xmin <= xmax)) { xmin = 0; xmax = 1; }
  if (!(ymin <= ymax)) { ymin = 0; ymax = 1; }
  if (xmax == xmin) { xmax += 0.5; xmin -= 0.5; }
  if (ymax == ymin) { ymax += 0.5; ymin -= 0.5; }

  const double sx = (W - ml - mr) / (xmax - xmin);
  const double sy = (H - mt - mb) / (ymax - ymin);
  auto px = [&](double x) { return ml + (x - xmin) * sx; };
  auto py = [&](double y) { return H - mb - (y - ymin) * sy; };

  std::ofstream f(path, std::ios::binary);
  require(f.good(), Err::IoError, "cannot open for writing: " + path);

  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  f << "  <rect width=\"" << W << "\" height=\"" << H
    << "\" fill=\"#ffffff\"/>\n";
  if (!title.empty())
    f << "  <text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << xml_escape(title) << "</text>\n";

  // Axes with min/max tick labels.
  f << "  <line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
    << "\" y2=\"" << H - mb << "\" stroke=\"#333333\"/>\n";
  f << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
    << "\" y2=\"" << H - mb << "\" stroke=\"#333333\"/>\n";
  f << "  <text x=\"" << ml << "\" y=\"" << H - mb + 18
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"11\">"
    << dbl2(xmin) << "</text>\n";
  f << "  <text x=\"" << W - mr << "\" y=\"" << H - mb + 18
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"11\">"
    << dbl2(xmax) << "</text>\n";
  f << "  <text x=\"" << ml - 8 << "\" y=\"" << H - mb
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
    << dbl2(ymin) << "</text>\n";
  f << "  <text x=\"" << ml - 8 << "\" y=\"" << mt + 4
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
    << dbl2(ymax) << "</text>\n";
  f << "  <text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\">"
    << xml_escape(x_label) << "</text>\n";
  f << "  <text x=\"18\" y=\"" << (mt + H - mb) / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 18 "
    << (mt + H - mb) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  // Every series carries the plotted values in data units so a reader can
  // check relations between curves without undoing the pixel transform.
  for (const auto& c : curves) {
    std::string dx, dy;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (i) { dx += ' '; dy += ' '; }
      dx += dbl17(c.x[i]);
      dy += dbl17(c.y[i]);
    }
    if (c.points_only) {
      f << "  <g id=\"" << xml_escape(c.id) << "\" fill=\"" << c.color
        << "\" data-x=\"" << dx << "\" data-y=\"" << dy << "\">\n";
      for (std::size_t i = 0; i < c.x.size(); ++i) {
        if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) continue;
        f << "    <circle cx=\"" << dbl2(px(c.x[i])) << "\" cy=\""
          << dbl2(py(c.y[i])) << "\" r=\"2.5\"/>\n";
      }
      f << "  </g>\n";
    } else {
      f << "  <polyline id=\"" << xml_escape(c.id)
        << "\" fill=\"none\" stroke=\"" << c.color
        << "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < c.x.size(); ++i) {
        if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) continue;
        if (!first) f << ' ';
        first = false;
        f << dbl2(px(c.x[i])) << ',' << dbl2(py(c.y[i]));
      }
      f << "\" data-x=\"" << dx << "\" data-y=\"" << dy << "\"/>\n";
    }
  }
  f << "</svg>\n";
  f.flush();
  require(f.good(), Err::IoError, "write failed: " + path);
}

}  // namespace qekit::report
