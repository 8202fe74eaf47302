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

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "qekit/dataset.hpp"
#include "qekit/errors.hpp"
#include "qekit/spectrum.hpp"

namespace qekit {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& path, int lineno) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;  // from_chars rejects an explicit plus
  double v = 0.0;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || b == e)
    fail(Err::IoError, path + ":" + std::to_string(lineno) +
                           ": cannot parse number '" + s + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::map<std::string, std::string> metadata;
};

CsvTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::IoError, "cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      std::string body = trim(s.substr(1));
      auto eq = body.find('=');
      if (eq != std::string::npos) {
        std::string key = trim(body.substr(0, eq));
        if (!key.empty()) t.metadata[key] = trim(body.substr(eq + 1));
      }
      continue;
    }
    if (!have_header) {
      t.header = split_csv(s);
      require(t.header.size() >= 2, Err::IoError,
              path + ": header needs at least two columns");
      t.columns.resize(t.header.size());
      have_header = true;
      continue;
    }
    auto cells = split_csv(s);
    if (cells.size() != t.header.size())
      fail(Err::IoError, path + ":" + std::to_string(lineno) +
                             ": expected " + std::to_string(t.header.size()) +
                             " columns, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c)
      t.columns[c].push_back(parse_double(cells[c], path, lineno));
  }
  require(have_header, Err::IoError, path + ": no header row found");
  return t;
}

void write_metadata(std::ofstream& out,
                    const std::map<std::string, std::string>& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << "=" << v << "\n";
}

}  // namespace

namespace spectra {

Spectrum read_spectrum_csv(const std::string& path) {
  CsvTable t = read_table(path);
  require(t.header.size() == 2 || t.header.size() == 3, Err::IoError,
          path + ": expected columns axis,intensity[,sigma]");
  require(t.header[0] == "axis" && t.header[1] == "intensity", Err::IoError,
          path + ": header must start with axis,intensity");
  if (t.header.size() == 3)
    require(t.header[2] == "sigma", Err::IoError,
            path + ": third column must be sigma");

  AxisKind kind = AxisKind::wavelength_nm;
  auto it = t.metadata.find("axis_kind");
  if (it != t.metadata.end()) {
    kind = axis_kind_from_string(it->second);
    t.metadata.erase(it);
  }
  std::vector<double> sig;
  if (t.columns.size() == 3) sig = std::move(t.columns[2]);
  return Spectrum(kind, std::move(t.columns[0]), std::move(t.columns[1]),
                  std::move(sig), std::move(t.metadata));
}

void write_spectrum_csv(const std::string& path, const Spectrum& s) {
  std::ofstream out(path);
  if (!out) fail(Err::IoError, "cannot write '" + path + "'");
  out.precision(17);
  out << "# axis_kind=" << to_string(s.axis_kind) << "\n";
  write_metadata(out, s.metadata);
  out << "axis,intensity,sigma\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << s.axis[i] << "," << s.intensity[i] << "," << s.sigma[i] << "\n";
  if (!out) fail(Err::IoError, "short write to '" + path + "'");
}

}  // namespace spectra

XYSeries read_xy_csv(const std::string& path) {
  CsvTable t = read_table(path);
  require(t.header.size() == 2 || t.header.size() == 3, Err::IoError,
          path + ": expected columns x,y[,sigma]");
  XYSeries d;
  d.x_name = t.header[0];
  d.y_name = t.header[1];
  d.x = std::move(t.columns[0]);
  d.y = std::move(t.columns[1]);
  if (t.columns.size() == 3) d.sigma = std::move(t.columns[2]);
  d.metadata = std::move(t.metadata);
  return d;
}

void write_xy_csv(const std::string& path, const XYSeries& d) {
  std::ofstream out(path);
  if (!out) fail(Err::IoError, "cannot write '" + path + "'");
  out.precision(17);
  write_metadata(out, d.metadata);
  out << d.x_name << "," << d.y_name;
  if (!d.sigma.empty()) out << ",sigma";
  out << "\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << d.x[i] << "," << d.y[i];
    if (!d.sigma.empty()) out << "," << d.sigma[i];
    out << "\n";
  }
  if (!out) fail(Err::IoError, "short write to '" + path + "'");
}

}  // namespace qekit
