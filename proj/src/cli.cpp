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

#include "qekit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qekit/constants.hpp"
#include "qekit/dataset.hpp"
#include "qekit/errors.hpp"
#include "qekit/photophysics.hpp"
#include "qekit/report.hpp"
#include "qekit/spectrum.hpp"
#include "qekit/survey.hpp"
#include "qekit/synth.hpp"
#include "qekit/vibronic.hpp"

namespace qekit::cli {
namespace {

namespace fs = std::filesystem;
using report::json;

// ---------------------------------------------------------------------------
// Config files: JSON, a flat TOML subset (key = value, scalars and one-level
// arrays), or a prior report whose embedded `config` object is reused as-is.

json toml_scalar(const std::string& tok, int lineno) {
  require(!tok.empty(), Err::ConfigError,
          "empty value on config line " + std::to_string(lineno));
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok.front() == '"') {
    require(tok.size() >= 2 && tok.back() == '"', Err::ConfigError,
            "unterminated string on config line " + std::to_string(lineno));
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      if (tok[i] == '\\' && i + 2 < tok.size()) ++i;
      out += tok[i];
    }
    return out;
  }
  try {
    if (tok.find_first_of(".eE") == std::string::npos ||
        tok.find_first_of("xX") != std::string::npos)
      return static_cast<long long>(std::stoll(tok, nullptr, 0));
  } catch (...) {
    fail(Err::ConfigError,
         "bad number on config line " + std::to_string(lineno) + ": " + tok);
  }
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    require(used == tok.size(), Err::ConfigError,
            "bad number on config line " + std::to_string(lineno) + ": " + tok);
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    fail(Err::ConfigError,
         "bad number on config line " + std::to_string(lineno) + ": " + tok);
  }
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Splits a [ ... ] body on top-level commas, respecting quoted strings.
std::vector<std::string> split_array_items(const std::string& body) {
  std::vector<std::string> items;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (quoted) {
      cur += c;
      if (c == '\\' && i + 1 < body.size()) cur += body[++i];
      else if (c == '"') quoted = false;
    } else if (c == '"') {
      cur += c;
      quoted = true;
    } else if (c == ',') {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !items.empty()) items.push_back(cur);
  return items;
}

json parse_toml_subset(std::istream& in) {
  json out = json::object();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Cut comments outside of strings.
    bool quoted = false;
    std::string code;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (!quoted && c == '#') break;
      code += c;
      if (quoted && c == '\\' && i + 1 < line.size()) code += line[++i];
      else if (c == '"') quoted = !quoted;
    }
    code = trim(code);
    if (code.empty()) continue;
    require(code.front() != '[', Err::ConfigError,
            "config tables are not supported (line " + std::to_string(lineno) +
                ")");
    std::size_t eq = code.find('=');
    require(eq != std::string::npos && eq > 0, Err::ConfigError,
            "expected key = value on config line " + std::to_string(lineno));
    std::string key = trim(code.substr(0, eq));
    std::string val = trim(code.substr(eq + 1));
    require(!key.empty() && key.find_first_not_of(
                                "abcdefghijklmnopqrstuvwxyz"
                                "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") ==
                                std::string::npos,
            Err::ConfigError,
            "bad config key on line " + std::to_string(lineno));
    if (!val.empty() && val.front() == '[') {
      require(val.back() == ']', Err::ConfigError,
              "unterminated array on config line " + std::to_string(lineno));
      json arr = json::array();
      for (const std::string& item :
           split_array_items(val.substr(1, val.size() - 2)))
        arr.push_back(toml_scalar(trim(item), lineno));
      out[key] = std::move(arr);
    } else {
      out[key] = toml_scalar(val, lineno);
    }
  }
  return out;
}

json load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), Err::IoError, "cannot read config: " + path);
  json j;
  if (fs::path(path).extension() == ".toml") {
    j = parse_toml_subset(f);
  } else {
    j = json::parse(f, nullptr, false);
    require(!j.is_discarded(), Err::ConfigError, "invalid JSON: " + path);
  }
  require(j.is_object(), Err::ConfigError,
          "config must be a key/value table: " + path);
  // A prior report: reuse its resolved config verbatim.
  if (j.contains("config") && j["config"].is_object()) return j["config"];
  return j;
}

// Per-subcommand state: declared defaults, the config file, and any flag
// overrides (collected only for flags actually given).  Merge order is
// defaults < config file < flags; keys outside the declared set are
// rejected.  Output path and plot toggle stay outside the resolved config
// so re-runs to a different destination compare bit-identical.
struct CmdState {
  json defaults = json::object();
  json overrides = json::object();
  std::string config_path;
  std::string output;
  bool plot = false;
};

struct Config {
  json resolved;

  const json& at(const std::string& key) const {
    auto it = resolved.find(key);
    require(it != resolved.end(), Err::ConfigError,
            "missing config key: " + key);
    return *it;
  }
  double num(const std::string& key) const {
    const json& v = at(key);
    require(v.is_number(), Err::ConfigError,
            "config key '" + key + "' must be a number");
    return v.get<double>();
  }
  long long integer(const std::string& key) const {
    const json& v = at(key);
    require(v.is_number(), Err::ConfigError,
            "config key '" + key + "' must be an integer");
    if (v.is_number_integer()) return v.get<long long>();
    double d = v.get<double>();
    require(d == std::floor(d), Err::ConfigError,
            "config key '" + key + "' must be an integer");
    return static_cast<long long>(d);
  }
  bool flag(const std::string& key) const {
    const json& v = at(key);
    require(v.is_boolean(), Err::ConfigError,
            "config key '" + key + "' must be true or false");
    return v.get<bool>();
  }
  std::string str(const std::string& key) const {
    const json& v = at(key);
    require(v.is_string(), Err::ConfigError,
            "config key '" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::vector<double> num_array(const std::string& key) const {
    const json& v = at(key);
    require(v.is_array(), Err::ConfigError,
            "config key '" + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
      require(e.is_number(), Err::ConfigError,
              "config key '" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
};

Config resolve(const CmdState& st) {
  Config c;
  c.resolved = st.defaults;
  if (!st.config_path.empty()) {
    json file = load_config_file(st.config_path);
    for (const auto& [k, v] : file.items()) {
      require(c.resolved.contains(k), Err::ConfigError,
              "unknown config key: " + k);
      c.resolved[k] = v;
    }
  }
  for (const auto& [k, v] : st.overrides.items()) c.resolved[k] = v;
  return c;
}

std::string require_output(const CmdState& st) {
  require(!st.output.empty(), Err::UsageError, "--output is required");
  return st.output;
}

std::string svg_path(const std::string& report_path) {
  return fs::path(report_path).replace_extension(".svg").string();
}

std::string dbl17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared ingestion: CSV -> calibrated energy-domain spectrum -> lineshape.

spectra::EfficiencyCurve load_efficiency(const std::string& path) {
  XYSeries d = read_xy_csv(path);
  return spectra::EfficiencyCurve(d.x, d.y);
}

spectra::Spectrum read_energy_spectrum(const Config& c) {
  const std::string path = c.str("input");
  require(!path.empty(), Err::UsageError, "--input is required");
  spectra::Spectrum s = spectra::read_spectrum_csv(path);
  const std::string cal = c.str("calibration");
  if (!cal.empty()) s = spectra::calibrate(s, load_efficiency(cal));
  if (s.axis_kind == spectra::AxisKind::wavelength_nm)
    s = spectra::to_energy(s);
  return s;
}

double zpl_hint(const Config& c, const spectra::Spectrum& energy) {
  double hint = c.num("e_zpl_hint_ev");
  if (hint > 0.0) return hint;
  std::size_t imax = 0;
  for (std::size_t i = 1; i < energy.size(); ++i)
    if (energy.intensity[i] > energy.intensity[imax]) imax = i;
  return energy.axis[imax];
}

spectra::Spectrum maybe_rebin(const spectra::Spectrum& energy, double target) {
  if (target <= 0.0) return energy;
  return spectra::rebin_density(energy,
                                spectra::equal_count_edges(energy, target));
}

vibronic::VibronicFitConfig vib_config(const Config& c) {
  vibronic::VibronicFitConfig v;
  v.delta_e_ev = c.num("delta_e_mev") * 1e-3;
  v.e_max_ev = c.num("e_max_mev") * 1e-3;
  v.zpl_shape = zpl_shape_from_string(c.str("zpl_shape"));
  v.n_max = static_cast<int>(c.integer("n_max"));
  v.fit_gamma = c.flag("fit_gamma");
  v.gamma_fixed_ev = c.num("gamma_fixed_uev") * 1e-6;
  v.zpl_window_gammas = c.num("zpl_window_gammas");
  v.tail_tol = c.num("tail_tol");
  v.smoothness = c.num("smoothness");
  v.max_iterations = static_cast<int>(c.integer("max_iterations"));
  return v;
}

void add_vibronic_defaults(json& d) {
  d["input"] = "";
  d["calibration"] = "";
  d["e_zpl_hint_ev"] = 0.0;
  d["rebin_target_counts"] = 0.0;
  d["delta_e_mev"] = 2.0;
  d["e_max_mev"] = 200.0;
  d["zpl_shape"] = "lorentzian";
  d["n_max"] = 0;
  d["fit_gamma"] = true;
  d["gamma_fixed_uev"] = 0.0;
  d["zpl_window_gammas"] = 3.0;
  d["tail_tol"] = 1e-6;
  d["smoothness"] = 0.0;
  d["max_iterations"] = 500;
}

// ---------------------------------------------------------------------------
// Plots.

void plot_xy_fit(const std::string& path, const XYSeries& d,
                 const std::vector<double>& model_x,
                 const std::vector<double>& model_y, const std::string& xl,
                 const std::string& yl, const std::string& title) {
  std::vector<report::Curve> curves;
  curves.push_back({"data", d.x, d.y, "#1f6fb2", true});
  curves.push_back({"model_total", model_x, model_y, "#c23a2b", false});
  report::write_svg(path, curves, xl, yl, title);
}

void plot_vibronic(const std::string& path, const spectra::Lineshape& ls,
                   const vibronic::VibronicFit& fit) {
  std::vector<report::Curve> curves;
  curves.push_back({"data", ls.delta_e_ev, ls.density, "#888888", true});
  curves.push_back({"model_total", ls.delta_e_ev, fit.model, "#000000", false});

  const double shift = ls.e_zpl_hint_ev - fit.params.e_zpl_ev;
  LineProfile prof(fit.params.zpl_shape, fit.params.gamma_zpl_ev);
  std::vector<double> qrel(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i)
    qrel[i] = ls.delta_e_ev[i] - shift;

  std::vector<double> zpl(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i)
    zpl[i] = fit.amplitude * fit.zpl_weight * prof.pdf(qrel[i]);
  curves.push_back({"zpl", ls.delta_e_ev, zpl, "#c23a2b", false});

  const char* palette[] = {"#1f6fb2", "#2a9d4e", "#b2731f",
                           "#7a4fb2", "#b21f6f", "#1fb2a9"};
  for (std::size_t k = 0; k < fit.components.size(); ++k) {
    const auto& comp = fit.components[k];
    std::vector<double> y =
        vibronic::convolve_profile_at(comp.shape, prof, qrel);
    for (double& v : y) v *= fit.amplitude * comp.weight;
    curves.push_back({"n_phonon_" + std::to_string(comp.n), ls.delta_e_ev, y,
                      palette[k % 6], false});
  }
  report::write_svg(path, curves, "energy offset (eV)", "density",
                    "vibronic decomposition");
}

void plot_temp_broadening(const std::string& path, const XYSeries& d,
                          const photo::TemperatureBroadeningFit& fit) {
  std::vector<report::Curve> curves;
  curves.push_back({"data", d.x, d.y, "#1f6fb2", true});
  curves.push_back({"model_total", d.x, fit.model, "#000000", false});
  curves.push_back({"component_const", d.x, fit.component_const, "#c23a2b",
                    false});
  curves.push_back({"component_linear", d.x, fit.component_linear, "#2a9d4e",
                    false});
  curves.push_back({"component_t5", d.x, fit.component_t5, "#7a4fb2", false});
  report::write_svg(path, curves, "temperature (K)", "fwhm (eV)",
                    "linewidth vs temperature");
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

int run_convert(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  const std::string path = c.str("input");
  require(!path.empty(), Err::UsageError, "--input is required");
  spectra::Spectrum s = spectra::read_spectrum_csv(path);
  const std::string cal = c.str("calibration");
  if (!cal.empty()) s = spectra::calibrate(s, load_efficiency(cal));
  const std::string target = c.str("target_axis");
  if (target == "energy_ev") {
    if (s.axis_kind == spectra::AxisKind::wavelength_nm)
      s = spectra::to_energy(s);
  } else if (target == "wavelength_nm") {
    require(s.axis_kind == spectra::AxisKind::wavelength_nm, Err::ConfigError,
            "energy to wavelength conversion is not supported");
  } else {
    fail(Err::ConfigError, "target_axis must be energy_ev or wavelength_nm");
  }
  s = maybe_rebin(s, c.num("rebin_target_counts"));
  s.metadata["config"] = c.resolved.dump();
  spectra::write_spectrum_csv(out, s);
  return 0;
}

int run_vibronic_fit(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  spectra::Spectrum energy = read_energy_spectrum(c);
  const double hint = zpl_hint(c, energy);
  spectra::Spectrum binned = maybe_rebin(energy, c.num("rebin_target_counts"));
  spectra::Lineshape ls = spectra::to_lineshape(binned, hint);
  vibronic::VibronicFitConfig vcfg = vib_config(c);
  vibronic::VibronicFit fit =
      vibronic::fit_vibronic(ls, vcfg, c.num("temperature_k"));
  json rep = report::vibronic_report(fit);
  rep["config"] = c.resolved;
  report::write_json(out, rep);
  if (st.plot) plot_vibronic(svg_path(out), ls, fit);
  return fit.converged ? 0 : 1;
}

int run_temp_series(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  const std::string manifest_path = c.str("input");
  require(!manifest_path.empty(), Err::UsageError, "--input is required");

  std::ifstream mf(manifest_path, std::ios::binary);
  require(mf.good(), Err::IoError, "cannot read manifest: " + manifest_path);
  json mj = json::parse(mf, nullptr, false);
  require(!mj.is_discarded(), Err::ConfigError,
          "invalid JSON manifest: " + manifest_path);
  if (mj.is_object() && mj.contains("series")) mj = mj["series"];
  require(mj.is_array() && mj.size() >= 2, Err::ConfigError,
          "manifest must list at least two {file, temperature_k} entries");

  const fs::path base = fs::path(manifest_path).parent_path();
  const std::string cal = c.str("calibration");
  std::optional<spectra::EfficiencyCurve> curve;
  if (!cal.empty()) curve = load_efficiency(cal);

  std::vector<std::pair<spectra::Lineshape, double>> series;
  for (const auto& entry : mj) {
    require(entry.is_object() && entry.contains("file") &&
                entry["file"].is_string() && entry.contains("temperature_k") &&
                entry["temperature_k"].is_number(),
            Err::ConfigError,
            "manifest entries need a file string and a temperature_k number");
    fs::path p = entry["file"].get<std::string>();
    if (p.is_relative()) p = base / p;
    spectra::Spectrum s = spectra::read_spectrum_csv(p.string());
    if (curve) s = spectra::calibrate(s, *curve);
    if (s.axis_kind == spectra::AxisKind::wavelength_nm)
      s = spectra::to_energy(s);
    const double hint = zpl_hint(c, s);
    s = maybe_rebin(s, c.num("rebin_target_counts"));
    series.emplace_back(spectra::to_lineshape(s, hint),
                        entry["temperature_k"].get<double>());
  }

  vibronic::TemperatureSeriesFit ts =
      vibronic::fit_temperature_series(series, vib_config(c));
  json rep = report::temperature_series_report(ts);
  rep["config"] = c.resolved;
  report::write_json(out, rep);

  bool all_ok = true;
  std::vector<double> tx, sy;
  for (const auto& el : ts.elements) {
    if (!el.ok || !el.fit.converged) all_ok = false;
    if (el.ok) {
      tx.push_back(el.temperature_k);
      sy.push_back(el.fit.params.s_hr);
    }
  }
  if (st.plot) {
    std::vector<report::Curve> curves;
    curves.push_back({"s_hr", tx, sy, "#1f6fb2", true});
    if (!tx.empty())
      curves.push_back({"s_hr_mean",
                        {tx.front(), tx.back()},
                        {ts.s_hr_mean, ts.s_hr_mean},
                        "#c23a2b",
                        false});
    report::write_svg(svg_path(out), curves, "temperature (K)",
                      "huang-rhys factor", "coupling vs temperature");
  }
  return all_ok ? 0 : 1;
}

double peak_model_at(const photo::PeakFit& f, double e) {
  if (f.shape == ZplShape::lorentzian) {
    const double hw = 0.5 * f.fwhm_ev;
    const double d = e - f.center_ev;
    return f.baseline + f.amplitude * hw * hw / (d * d + hw * hw);
  }
  const double sig = f.fwhm_ev / kGaussFwhmPerSigma;
  const double d = (e - f.center_ev) / sig;
  return f.baseline + f.amplitude * std::exp(-0.5 * d * d);
}

int run_peak_fit(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  spectra::Spectrum energy = read_energy_spectrum(c);
  std::optional<std::pair<double, double>> window;
  const double wlo = c.num("window_lo_ev"), whi = c.num("window_hi_ev");
  if (wlo != 0.0 || whi != 0.0) {
    require(whi > wlo, Err::ConfigError,
            "window_hi_ev must exceed window_lo_ev");
    window = std::make_pair(wlo, whi);
  }
  photo::PeakFit fit = photo::fit_peak(
      energy, zpl_shape_from_string(c.str("zpl_shape")), window);
  const double irf = c.num("irf_fwhm_uev") * 1e-6;
  if (irf > 0.0)
    fit.fwhm_irf_corrected_ev = photo::correct_irf(
        fit.fwhm_ev, irf, photo::irf_method_from_string(c.str("irf_method")));
  json rep = report::peak_report(fit);
  rep["center_nm"] = constants::hc_ev_nm / fit.center_ev;
  rep["config"] = c.resolved;
  report::write_json(out, rep);
  if (st.plot) {
    std::vector<double> my(energy.size());
    for (std::size_t i = 0; i < energy.size(); ++i)
      my[i] = peak_model_at(fit, energy.axis[i]);
    XYSeries d;
    d.x = energy.axis;
    d.y = energy.intensity;
    plot_xy_fit(svg_path(out), d, energy.axis, my, "energy (eV)", "counts",
                "single line fit");
  }
  return fit.quality.converged ? 0 : 1;
}

XYSeries read_input_xy(const Config& c) {
  const std::string path = c.str("input");
  require(!path.empty(), Err::UsageError, "--input is required");
  return read_xy_csv(path);
}

int run_power_fit(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  XYSeries d = read_input_xy(c);
  photo::PowerBroadeningFit fit = photo::fit_power_broadening(d);
  json rep = report::power_report(fit);
  rep["config"] = c.resolved;
  report::write_json(out, rep);
  if (st.plot)
    plot_xy_fit(svg_path(out), d, d.x, fit.model, d.x_name, d.y_name,
                "power broadening");
  return fit.quality.converged ? 0 : 1;
}

int run_temp_fit(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  XYSeries d = read_input_xy(c);
  std::optional<double> irf;
  const double irf_uev = c.num("irf_fwhm_uev");
  if (irf_uev > 0.0) irf = irf_uev * 1e-6;
  photo::TemperatureBroadeningFit fit = photo::fit_temperature_broadening(
      d, irf, photo::irf_method_from_string(c.str("irf_method")));
  json rep = report::temp_broadening_report(fit);
  rep["config"] = c.resolved;
  report::write_json(out, rep);
  if (st.plot) plot_temp_broadening(svg_path(out), d, fit);
  return fit.quality.converged ? 0 : 1;
}

int run_sat_fit(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  XYSeries d = read_input_xy(c);
  photo::SaturationFit fit =
      photo::fit_saturation(d, c.flag("with_background"));
  json rep = report::saturation_report(fit);
  rep["config"] = c.resolved;
  report::write_json(out, rep);
  if (st.plot)
    plot_xy_fit(svg_path(out), d, d.x, fit.model, d.x_name, d.y_name,
                "saturation");
  return fit.quality.converged ? 0 : 1;
}

int run_g2_fit(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  XYSeries d = read_input_xy(c);
  std::optional<double> irf;
  const double irf_ns = c.num("irf_fwhm_ns");
  if (irf_ns > 0.0) irf = irf_ns;
  photo::G2Fit fit = photo::fit_g2(d, irf, c.flag("fit_normalization"));
  json rep = report::g2_report(fit);
  rep["config"] = c.resolved;
  report::write_json(out, rep);
  if (st.plot)
    plot_xy_fit(svg_path(out), d, d.x, fit.model, d.x_name, d.y_name,
                "photon correlation");
  return fit.quality.converged ? 0 : 1;
}

int run_lifetime_fit(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  XYSeries d = read_input_xy(c);
  photo::LifetimeFit fit = photo::fit_lifetime(d);
  json rep = report::lifetime_report(fit);
  rep["config"] = c.resolved;
  report::write_json(out, rep);
  if (st.plot)
    plot_xy_fit(svg_path(out), d, fit.t_fitted, fit.model, d.x_name, d.y_name,
                "decay");
  return fit.quality.converged ? 0 : 1;
}

int run_radlife(const CmdState& st) {
  Config c = resolve(st);
  const double tau = photo::radiative_lifetime_ns(
      c.num("e_zpl_ev"), c.num("dipole_e_angstrom"), c.num("n_host"));
  std::cout << "tau_rad_ns = " << dbl17(tau) << '\n';
  if (!st.output.empty()) {
    json rep;
    rep["e_zpl_ev"] = c.num("e_zpl_ev");
    rep["dipole_e_angstrom"] = c.num("dipole_e_angstrom");
    rep["n_host"] = c.num("n_host");
    rep["tau_rad_ns"] = tau;
    rep["config"] = c.resolved;
    report::write_json(st.output, rep);
  }
  return 0;
}

int run_survey(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);
  const std::string path = c.str("input");
  require(!path.empty(), Err::UsageError, "--input is required");
  survey::HyperspectralCube cube = fs::is_directory(path)
                                       ? survey::load_cube_csv_dir(path)
                                       : survey::load_cube(path);
  double lo = c.num("band_lo_nm"), hi = c.num("band_hi_nm");
  if (lo == 0.0 && hi == 0.0) {
    lo = cube.wavelengths_nm.front();
    hi = cube.wavelengths_nm.back();
  }
  std::vector<survey::EmitterRecord> records = survey::detect_emitters(
      cube, lo, hi, c.num("min_snr"), c.num("min_separation_px"));
  std::optional<survey::ZplDistribution> dist;
  if (records.size() >= 5)
    dist = survey::zpl_distribution(records, c.num("bin_width_nm"));
  json rep = report::survey_report(records, dist ? &*dist : nullptr);
  rep["config"] = c.resolved;
  report::write_json(out, rep);
  if (st.plot && dist) {
    std::vector<double> cx(dist->counts.size()), cy(dist->counts.size());
    for (std::size_t i = 0; i < dist->counts.size(); ++i) {
      cx[i] = 0.5 * (dist->bin_edges_nm[i] + dist->bin_edges_nm[i + 1]);
      cy[i] = static_cast<double>(dist->counts[i]);
    }
    std::vector<report::Curve> curves;
    curves.push_back({"zpl_histogram", cx, cy, "#1f6fb2", false});
    report::write_svg(svg_path(out), curves, "zpl wavelength (nm)",
                      "emitters", "zpl distribution");
  }
  return 0;
}

std::vector<double> sample_grid(const Config& c) {
  const double lo = c.num("x_min"), hi = c.num("x_max");
  const long long n = c.integer("x_points");
  require(n >= 2, Err::ConfigError, "x_points must be at least 2");
  require(hi > lo, Err::ConfigError, "x_max must exceed x_min");
  const std::string spacing = c.str("x_spacing");
  std::vector<double> x(static_cast<std::size_t>(n));
  if (spacing == "log") {
    require(lo > 0.0, Err::ConfigError, "log spacing needs x_min > 0");
    const double r = std::log(hi / lo) / static_cast<double>(n - 1);
    for (long long i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] =
          lo * std::exp(r * static_cast<double>(i));
  } else if (spacing == "linear") {
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (long long i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
  } else {
    fail(Err::ConfigError, "x_spacing must be linear or log");
  }
  return x;
}

int run_synth(const CmdState& st) {
  Config c = resolve(st);
  const std::string out = require_output(st);

  synth::NoiseModel noise;
  noise.kind = synth::noise_kind_from_string(c.str("noise_kind"));
  noise.scale = c.num("noise_scale");
  noise.seed = static_cast<std::uint64_t>(c.integer("seed"));

  const std::string kind = c.str("kind");
  if (kind == "vibronic") {
    vibronic::VibronicParams p;
    p.e_zpl_ev = c.num("e_zpl_ev");
    p.gamma_zpl_ev = c.num("gamma_zpl_uev") * 1e-6;
    p.s_hr = c.num("s_hr");
    p.temperature_k = c.num("temperature_k");
    p.zpl_shape = zpl_shape_from_string(c.str("zpl_shape"));
    p.n_max = static_cast<int>(c.integer("n_max"));
    p.psf.delta_e_ev = c.num("psf_delta_e_mev") * 1e-3;
    p.psf.e_max_ev = c.num("psf_e_max_mev") * 1e-3;
    std::vector<double> vals = c.num_array("psf_values");
    if (vals.empty())
      p.psf = vibronic::PhononSpectralFunction::uniform(p.psf.delta_e_ev,
                                                        p.psf.e_max_ev);
    else
      p.psf.values = std::move(vals);

    const long long n = c.integer("wl_points");
    require(n >= 8, Err::ConfigError, "wl_points must be at least 8");
    const double lo = c.num("wl_min_nm"), hi = c.num("wl_max_nm");
    require(hi > lo && lo > 0.0, Err::ConfigError,
            "need 0 < wl_min_nm < wl_max_nm");
    std::vector<double> wl(static_cast<std::size_t>(n));
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (long long i = 0; i < n; ++i)
      wl[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);

    spectra::Spectrum s =
        synth::gen_vibronic_spectrum(p, wl, noise, c.num("peak_counts"));
    s.metadata["config"] = c.resolved.dump();
    spectra::write_spectrum_csv(out, s);
    return 0;
  }
  if (kind == "scalar") {
    synth::ScalarModel model =
        synth::scalar_model_from_string(c.str("model"));
    const json& pj = c.at("params");
    require(pj.is_object(), Err::ConfigError,
            "config key 'params' must be an object of numbers");
    std::map<std::string, double> params;
    for (const auto& [k, v] : pj.items()) {
      require(v.is_number(), Err::ConfigError,
              "params entry '" + k + "' must be a number");
      params[k] = v.get<double>();
    }
    XYSeries d = synth::gen_scalar_dataset(model, params, sample_grid(c), noise);
    d.metadata["config"] = c.resolved.dump();
    write_xy_csv(out, d);
    return 0;
  }
  fail(Err::ConfigError, "kind must be vibronic or scalar");
}

// ---------------------------------------------------------------------------
// Wiring.

std::shared_ptr<CmdState> make_cmd(CLI::App& app, const char* name,
                                   const char* desc, CLI::App** sub_out) {
  auto st = std::make_shared<CmdState>();
  CLI::App* sub = app.add_subcommand(name, desc);
  sub->add_option("--config", st->config_path,
                  "config file (TOML or JSON; a prior report also works)");
  sub->add_option("--output", st->output, "output file");
  sub->add_flag("--plot", st->plot, "also write an SVG plot");
  *sub_out = sub;
  return st;
}

void opt_num(CLI::App* sub, const std::shared_ptr<CmdState>& st,
             const char* flag, const char* key, const char* help) {
  sub->add_option_function<double>(
      flag, [st, key = std::string(key)](double v) { st->overrides[key] = v; },
      help);
}

void opt_int(CLI::App* sub, const std::shared_ptr<CmdState>& st,
             const char* flag, const char* key, const char* help) {
  sub->add_option_function<long long>(
      flag,
      [st, key = std::string(key)](long long v) { st->overrides[key] = v; },
      help);
}

void opt_str(CLI::App* sub, const std::shared_ptr<CmdState>& st,
             const char* flag, const char* key, const char* help) {
  sub->add_option_function<std::string>(
      flag,
      [st, key = std::string(key)](const std::string& v) {
        st->overrides[key] = v;
      },
      help);
}

void opt_true(CLI::App* sub, const std::shared_ptr<CmdState>& st,
              const char* flag, const char* key, const char* help) {
  sub->add_flag_function(
      flag,
      [st, key = std::string(key)](std::int64_t) { st->overrides[key] = true; },
      help);
}

void add_input(CLI::App* sub, const std::shared_ptr<CmdState>& st) {
  opt_str(sub, st, "--input", "input", "input file");
}

void add_spectrum_opts(CLI::App* sub, const std::shared_ptr<CmdState>& st) {
  add_input(sub, st);
  opt_str(sub, st, "--calibration", "calibration",
          "detector efficiency curve CSV (wavelength_nm, efficiency)");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"quantum emitter photoluminescence analysis"};
  app.require_subcommand(1);
  int code = 0;

  CLI::App* sub = nullptr;

  // convert
  {
    auto st = make_cmd(app, "convert",
                       "calibrate, convert to the energy domain, rebin", &sub);
    st->defaults["input"] = "";
    st->defaults["calibration"] = "";
    st->defaults["target_axis"] = "energy_ev";
    st->defaults["rebin_target_counts"] = 0.0;
    add_spectrum_opts(sub, st);
    opt_str(sub, st, "--target-axis", "target_axis",
            "energy_ev or wavelength_nm");
    opt_num(sub, st, "--rebin-target-counts", "rebin_target_counts",
            "equal-count rebinning target (0 disables)");
    sub->callback([st, &code] { code = run_convert(*st); });
  }

  // vibronic-fit
  {
    auto st = make_cmd(app, "vibronic-fit",
                       "fit the phonon-coupled emission model", &sub);
    add_vibronic_defaults(st->defaults);
    st->defaults["temperature_k"] = 4.0;
    add_spectrum_opts(sub, st);
    opt_num(sub, st, "--delta-e-mev", "delta_e_mev",
            "coupling density grid step (meV)");
    opt_num(sub, st, "--e-max-mev", "e_max_mev",
            "coupling density cutoff (meV)");
    opt_num(sub, st, "--temperature-k", "temperature_k", "sample temperature");
    opt_str(sub, st, "--zpl-shape", "zpl_shape", "lorentzian or gaussian");
    sub->callback([st, &code] { code = run_vibronic_fit(*st); });
  }

  // temp-series
  {
    auto st = make_cmd(app, "temp-series",
                       "fit a temperature series against one model", &sub);
    add_vibronic_defaults(st->defaults);
    add_spectrum_opts(sub, st);
    opt_num(sub, st, "--delta-e-mev", "delta_e_mev",
            "coupling density grid step (meV)");
    opt_num(sub, st, "--e-max-mev", "e_max_mev",
            "coupling density cutoff (meV)");
    opt_str(sub, st, "--zpl-shape", "zpl_shape", "lorentzian or gaussian");
    sub->callback([st, &code] { code = run_temp_series(*st); });
  }

  // peak-fit
  {
    auto st =
        make_cmd(app, "peak-fit", "fit a single line on a flat baseline", &sub);
    st->defaults["input"] = "";
    st->defaults["calibration"] = "";
    st->defaults["zpl_shape"] = "lorentzian";
    st->defaults["window_lo_ev"] = 0.0;
    st->defaults["window_hi_ev"] = 0.0;
    st->defaults["irf_fwhm_uev"] = 0.0;
    st->defaults["irf_method"] = "linear";
    add_spectrum_opts(sub, st);
    opt_str(sub, st, "--zpl-shape", "zpl_shape", "lorentzian or gaussian");
    opt_num(sub, st, "--irf-fwhm-uev", "irf_fwhm_uev",
            "spectrometer response FWHM (ueV, 0 disables)");
    opt_str(sub, st, "--irf-method", "irf_method", "linear or quadrature");
    sub->callback([st, &code] { code = run_peak_fit(*st); });
  }

  // power-fit
  {
    auto st = make_cmd(app, "power-fit",
                       "fit linewidth vs excitation power", &sub);
    st->defaults["input"] = "";
    add_input(sub, st);
    sub->callback([st, &code] { code = run_power_fit(*st); });
  }

  // temp-fit
  {
    auto st = make_cmd(app, "temp-fit",
                       "fit linewidth vs temperature", &sub);
    st->defaults["input"] = "";
    st->defaults["irf_fwhm_uev"] = 0.0;
    st->defaults["irf_method"] = "linear";
    add_input(sub, st);
    opt_num(sub, st, "--irf-fwhm-uev", "irf_fwhm_uev",
            "spectrometer response FWHM (ueV, 0 disables)");
    opt_str(sub, st, "--irf-method", "irf_method", "linear or quadrature");
    sub->callback([st, &code] { code = run_temp_fit(*st); });
  }

  // sat-fit
  {
    auto st = make_cmd(app, "sat-fit",
                       "fit count rate vs excitation power", &sub);
    st->defaults["input"] = "";
    st->defaults["with_background"] = false;
    add_input(sub, st);
    opt_true(sub, st, "--with-background", "with_background",
             "add a linear background term");
    sub->callback([st, &code] { code = run_sat_fit(*st); });
  }

  // g2-fit
  {
    auto st = make_cmd(app, "g2-fit",
                       "fit the second-order correlation dip", &sub);
    st->defaults["input"] = "";
    st->defaults["irf_fwhm_ns"] = 0.0;
    st->defaults["fit_normalization"] = false;
    add_input(sub, st);
    opt_num(sub, st, "--irf-fwhm-ns", "irf_fwhm_ns",
            "timing response FWHM (ns, 0 disables)");
    opt_true(sub, st, "--fit-normalization", "fit_normalization",
             "free the large-delay normalization");
    sub->callback([st, &code] { code = run_g2_fit(*st); });
  }

  // lifetime-fit
  {
    auto st = make_cmd(app, "lifetime-fit",
                       "fit an exponential decay trace", &sub);
    st->defaults["input"] = "";
    add_input(sub, st);
    sub->callback([st, &code] { code = run_lifetime_fit(*st); });
  }

  // radlife
  {
    auto st = make_cmd(app, "radlife",
                       "spontaneous emission lifetime from transition energy "
                       "and dipole moment",
                       &sub);
    st->defaults["e_zpl_ev"] = 0.0;
    st->defaults["dipole_e_angstrom"] = 0.0;
    st->defaults["n_host"] = 0.0;
    opt_num(sub, st, "--e-zpl", "e_zpl_ev", "transition energy (eV)");
    opt_num(sub, st, "--mu", "dipole_e_angstrom",
            "transition dipole moment (e*Angstrom)");
    opt_num(sub, st, "--n", "n_host", "host refractive index");
    sub->callback([st, &code] { code = run_radlife(*st); });
  }

  // survey
  {
    auto st = make_cmd(app, "survey",
                       "detect emitters in a hyperspectral map", &sub);
    st->defaults["input"] = "";
    st->defaults["band_lo_nm"] = 0.0;
    st->defaults["band_hi_nm"] = 0.0;
    st->defaults["min_snr"] = 6.0;
    st->defaults["min_separation_px"] = 2.0;
    st->defaults["bin_width_nm"] = 10.0;
    add_input(sub, st);
    opt_num(sub, st, "--band-lo-nm", "band_lo_nm",
            "integration band start (0 = full range)");
    opt_num(sub, st, "--band-hi-nm", "band_hi_nm",
            "integration band end (0 = full range)");
    opt_num(sub, st, "--min-snr", "min_snr", "detection threshold in MAD units");
    opt_num(sub, st, "--min-separation-px", "min_separation_px",
            "minimum emitter separation");
    opt_num(sub, st, "--bin-width-nm", "bin_width_nm",
            "zpl histogram bin width");
    sub->callback([st, &code] { code = run_survey(*st); });
  }

  // synth
  {
    auto st = make_cmd(app, "synth",
                       "generate synthetic spectra and scalar datasets", &sub);
    json& d = st->defaults;
    d["kind"] = "vibronic";
    d["e_zpl_ev"] = 1.567;
    d["gamma_zpl_uev"] = 150.0;
    d["s_hr"] = 1.0;
    d["temperature_k"] = 4.0;
    d["zpl_shape"] = "lorentzian";
    d["n_max"] = 0;
    d["psf_delta_e_mev"] = 2.0;
    d["psf_e_max_mev"] = 200.0;
    d["psf_values"] = json::array();
    d["wl_min_nm"] = 740.0;
    d["wl_max_nm"] = 930.0;
    d["wl_points"] = 2048;
    d["peak_counts"] = 1e4;
    d["model"] = "power_broadening";
    d["params"] = json::object();
    d["x_min"] = 0.0;
    d["x_max"] = 1.0;
    d["x_points"] = 25;
    d["x_spacing"] = "linear";
    d["noise_kind"] = "none";
    d["noise_scale"] = 1e4;
    d["seed"] = 0;
    opt_str(sub, st, "--kind", "kind", "vibronic or scalar");
    opt_str(sub, st, "--model", "model", "scalar model name");
    opt_num(sub, st, "--temperature-k", "temperature_k", "sample temperature");
    opt_str(sub, st, "--zpl-shape", "zpl_shape", "lorentzian or gaussian");
    opt_str(sub, st, "--noise-kind", "noise_kind", "none, poisson or gaussian");
    opt_num(sub, st, "--noise-scale", "noise_scale",
            "peak counts (poisson) or sigma (gaussian)");
    opt_int(sub, st, "--seed", "seed", "noise stream seed");
    sub->callback([st, &code] { code = run_synth(*st); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return code;
}

}  // namespace qekit::cli
