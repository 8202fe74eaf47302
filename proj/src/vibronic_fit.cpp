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

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "qekit/constants.hpp"
#include "qekit/errors.hpp"
#include "qekit/least_squares.hpp"
#include "qekit/parallel.hpp"
#include "qekit/vibronic.hpp"

namespace qekit::vibronic {

namespace {

// Residual model for the vibronic fit.  Internal parameters:
//   [0]            shift of the ZPL in the dE coordinate (e_zpl = hint - shift)
//   [1]            ln Gamma_ZPL            (only when the width is free)
//   [iv]           v with S_HR = v^2
//   [iu .. iu+N)   w_j with psf value S_j = exp(w_j); the log keeps cells
//                  positive without the zero-gradient pin of a square at 0
//   [ic]           ln amplitude
// The model is invariant under a common shift of the w_j (the one-phonon
// distribution is normalized), so one extra residual pins mean(S_j) = 1.
// All derivative columns are analytic; the profile convolution is done with
// closed-form segment integrals against the piecewise-linear sideband.
class VibronicResidual : public lsq::ResidualModel {
 public:
  std::vector<double> x, y, wgt;  // usable points, wgt = 1/sigma
  double t_k = 4.0;
  VibronicFitConfig cfg;
  int n_eval = 6;        // phonon order held fixed during optimization
  double smooth_w = 0.0; // sqrt of the first-difference penalty weight

  int iv = 0, iu = 0, ic = 0;  // parameter layout (set by init_layout)
  std::size_t n_psf = 0;

  void init_layout() {
    n_psf = static_cast<std::size_t>(
        std::llround(cfg.e_max_ev / cfg.delta_e_ev));
    iv = cfg.fit_gamma ? 2 : 1;
    iu = iv + 1;
    ic = iu + static_cast<int>(n_psf);
    smooth_w = cfg.smoothness > 0.0 ? std::sqrt(cfg.smoothness) : 0.0;
  }

  int n_params() const override { return ic + 1; }
  int n_residuals() const override {
    return static_cast<int>(x.size()) + 1 +
           (smooth_w > 0.0 ? static_cast<int>(n_psf) - 1 : 0);
  }

  void eval(const Eigen::VectorXd& p, Eigen::VectorXd& r) const override {
    core(p, r, nullptr);
  }
  void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const override {
    Eigen::VectorXd r(n_residuals());
    core(p, r, &jac);
  }

  // Model value at arbitrary points (used for reporting).
  std::vector<double> model_at(const Eigen::VectorXd& p,
                               const std::vector<double>& q_ev) const;

  // Pieces of the forward model at a parameter vector, shared with callers
  // that need the decomposition at the solution.
  struct Forward {
    LatticeFn i1;                 // normalized one-phonon distribution
    double z = 0.0;               // Bose-weighted mass before normalization
    std::vector<LatticeFn> ladder;  // I_1 .. I_n_eval
    LatticeFn sideband;           // sum_n w_n I_n
    std::vector<double> weights;  // w_1 .. w_n_eval
    bool valid = false;
  };
  Forward build_forward(double s, const std::vector<double>& psf_values,
                        int n_orders) const;

 private:
  void core(const Eigen::VectorXd& p, Eigen::VectorXd& r,
            Eigen::MatrixXd* jac) const;
};

// Adds w * term into acc assuming integer lattice offset, clipping nodes
// that fall outside (they are identically zero for the ladders used here).
void add_clipped(LatticeFn& acc, const LatticeFn& term, double w) {
  const long long off = std::llround((term.x0 - acc.x0) / acc.step);
  for (std::size_t i = 0; i < term.size(); ++i) {
    const long long j = off + static_cast<long long>(i);
    if (j >= 0 && j < static_cast<long long>(acc.size()))
      acc.values[static_cast<std::size_t>(j)] += w * term.values[i];
  }
}

VibronicResidual::Forward VibronicResidual::build_forward(
    double s, const std::vector<double>& psf_values, int n_orders) const {
  Forward f;
  // One-phonon lattice, kept unnormalized so derivative terms can reuse Z.
  double h = cfg.conv_step_ev > 0.0 ? cfg.conv_step_ev : 0.5 * cfg.delta_e_ev;
  const long long n_side = std::max(1ll, std::llround(cfg.e_max_ev / h));
  h = cfg.e_max_ev / static_cast<double>(n_side);

  PhononSpectralFunction psf;
  psf.delta_e_ev = cfg.delta_e_ev;
  psf.e_max_ev = cfg.e_max_ev;
  psf.values = psf_values;

  LatticeFn w;
  w.step = h;
  w.x0 = -(cfg.e_max_ev + h);
  w.values.assign(static_cast<std::size_t>(2 * (n_side + 1) + 1), 0.0);
  const long long center = n_side + 1;
  const double m0 = 0.5 * cfg.delta_e_ev;
  for (long long i = -n_side; i <= n_side; ++i) {
    double v;
    if (i == 0) {
      v = constants::k_boltzmann_ev_per_k * t_k * psf.values.front() / m0;
    } else {
      const double e = std::fabs(static_cast<double>(i)) * h;
      const double sv = psf.at(e);
      if (sv == 0.0) {
        v = 0.0;
      } else {
        const double n = bose_einstein(e, t_k);
        v = (i > 0 ? n + 1.0 : n) * sv;
      }
    }
    w.values[static_cast<std::size_t>(center + i)] = v;
  }
  f.z = w.integral();
  if (!(f.z > 0.0) || !std::isfinite(f.z)) return f;

  f.i1 = w;
  for (double& v : f.i1.values) v /= f.z;
  f.ladder.reserve(static_cast<std::size_t>(n_orders));
  f.ladder.push_back(f.i1);
  for (int n = 2; n <= n_orders; ++n)
    f.ladder.push_back(conv_lattice(f.ladder.back(), f.i1));
  f.weights = poisson_weights(s, n_orders);
  f.sideband = f.ladder.back();
  std::fill(f.sideband.values.begin(), f.sideband.values.end(), 0.0);
  for (int n = 1; n <= n_orders; ++n)
    add_clipped(f.sideband, f.ladder[static_cast<std::size_t>(n - 1)],
                f.weights[static_cast<std::size_t>(n - 1)]);
  f.valid = true;
  return f;
}

void VibronicResidual::core(const Eigen::VectorXd& p, Eigen::VectorXd& r,
                            Eigen::MatrixXd* jac) const {
  const std::size_t nd = x.size();
  r.resize(n_residuals());
  const double shift = p[0];
  const double gamma = cfg.fit_gamma ? std::exp(p[1]) : cfg.gamma_fixed_ev;
  const double v = p[iv];
  const double s_hr = v * v;
  const double c = std::exp(p[ic]);

  std::vector<double> s_vals(n_psf);
  for (std::size_t j = 0; j < n_psf; ++j)
    s_vals[j] = std::exp(p[iu + static_cast<int>(j)]);

  if (jac) jac->setZero(n_residuals(), n_params());

  Forward fw = build_forward(s_hr, s_vals, n_eval);
  if (!fw.valid || !std::isfinite(gamma) || gamma <= 0.0 ||
      !std::isfinite(c)) {
    r.setConstant(1e150);  // poisoned trial step; the solver rejects it
    return;
  }

  const LineProfile prof(cfg.zpl_shape, gamma);
  const double zpl_w = std::exp(-s_hr);
  const LatticeFn& P = fw.sideband;
  const std::size_t m = P.size();
  const double h = P.step;

  // Segment slopes/intercepts and their per-edge differences.
  std::vector<double> beta(m, 0.0), edge_a(m), edge_b(m);
  for (std::size_t e = 0; e + 1 < m; ++e)
    beta[e] = (P.values[e + 1] - P.values[e]) / h;
  for (std::size_t e = 0; e < m; ++e) {
    const double x_e = P.x(e);
    const double b_left = e > 0 ? beta[e - 1] : 0.0;
    const double b_right = e + 1 < m ? beta[e] : 0.0;
    const double a_left = e > 0 ? P.values[e - 1] - b_left * (x_e - h) : 0.0;
    const double a_right = P.values[e] - b_right * x_e;
    edge_a[e] = a_right - a_left;
    edge_b[e] = b_right - b_left;
  }

  // dE -> d(S_HR) of the sideband: B = sum_n (dw_n/dS) I_n with
  // dw_n/dS = e^{-S} S^{n-1} (n - S)/n!.
  Eigen::VectorXd bvec;
  Eigen::MatrixXd pprime;  // m x N, columns d(sideband)/d(s_j)
  Eigen::MatrixXd mrow;    // nd x m, hat-integral matrix of the profile
  std::vector<double> pdfq(nd);
  if (jac) {
    LatticeFn bfn = P;
    std::fill(bfn.values.begin(), bfn.values.end(), 0.0);
    {
      double term = std::exp(-s_hr);  // e^{-S} S^{n-1} / n! at n = 1
      for (int n = 1; n <= n_eval; ++n) {
        add_clipped(bfn, fw.ladder[static_cast<std::size_t>(n - 1)],
                    term * (n - s_hr));
        term *= s_hr / (n + 1);
      }
    }
    bvec = Eigen::Map<const Eigen::VectorXd>(bfn.values.data(),
                                             static_cast<long>(m));

    // R = sum_n n w_n I_n and K' = sum_{n>=2} n w_n I_{n-1}; both feed the
    // psf derivative d(sideband)/ds_j =
    //   (w_1 Bphi_j + K' (x) Bphi_j)/Z - (dZ_j/Z) R.
    LatticeFn rfn = P;
    std::fill(rfn.values.begin(), rfn.values.end(), 0.0);
    for (int n = 1; n <= n_eval; ++n)
      add_clipped(rfn, fw.ladder[static_cast<std::size_t>(n - 1)],
                  n * fw.weights[static_cast<std::size_t>(n - 1)]);
    LatticeFn kprime;
    if (n_eval >= 2) {
      kprime = fw.ladder[static_cast<std::size_t>(n_eval - 2)];
      std::fill(kprime.values.begin(), kprime.values.end(), 0.0);
      for (int n = 2; n <= n_eval; ++n)
        add_clipped(kprime, fw.ladder[static_cast<std::size_t>(n - 2)],
                    n * fw.weights[static_cast<std::size_t>(n - 1)]);
    }

    pprime.setZero(static_cast<long>(m), static_cast<long>(n_psf));
    const double m0 = 0.5 * cfg.delta_e_ev;
    const std::size_t s1 = fw.i1.size();
    const double w1 = fw.weights[0];
    for (std::size_t j = 0; j < n_psf; ++j) {
      // Bose-weighted hat basis function of psf cell j on the I1 lattice.
      LatticeFn bphi;
      bphi.x0 = fw.i1.x0;
      bphi.step = h;
      bphi.values.assign(s1, 0.0);
      const double mj = (static_cast<double>(j) + 0.5) * cfg.delta_e_ev;
      for (std::size_t i = 0; i < s1; ++i) {
        const double xi = bphi.x(i);
        double phi = 0.0;
        const double e = std::fabs(xi);
        if (xi == 0.0) {
          phi = 0.0;  // handled below: only cell 0 reaches E = 0
        } else if (e <= cfg.e_max_ev) {
          if (j == 0 && e <= m0) {
            phi = e / m0;
          } else if (j == n_psf - 1 && e >= mj) {
            phi = 1.0;
          } else if (std::fabs(e - mj) < cfg.delta_e_ev) {
            if (!(j == 0 && e < m0))
              phi = 1.0 - std::fabs(e - mj) / cfg.delta_e_ev;
          }
        }
        if (phi != 0.0) {
          const double n = bose_einstein(e, t_k);
          bphi.values[i] = (xi > 0.0 ? n + 1.0 : n) * phi;
        }
      }
      if (j == 0) {
        const long long center = std::llround(-fw.i1.x0 / h);
        bphi.values[static_cast<std::size_t>(center)] =
            constants::k_boltzmann_ev_per_k * t_k / m0;
      }
      double dz = 0.0;
      for (double bv : bphi.values) dz += bv;
      dz *= h;

      LatticeFn col = P;
      std::fill(col.values.begin(), col.values.end(), 0.0);
      add_clipped(col, bphi, w1);
      if (n_eval >= 2) add_clipped(col, conv_lattice(bphi, kprime), 1.0);
      const double dzz = dz / fw.z;
      for (std::size_t i = 0; i < m; ++i)
        pprime(static_cast<long>(i), static_cast<long>(j)) =
            col.values[i] / fw.z - dzz * rfn.values[i];
    }
    mrow.setZero(static_cast<long>(nd), static_cast<long>(m));
  }

  // Per-point profile integrals against the sideband plus the bare ZPL.
  std::vector<double> fcol(m), gcol(m), fgam, ggam;
  if (jac && cfg.fit_gamma) {
    fgam.resize(m);
    ggam.resize(m);
  }
  for (std::size_t i = 0; i < nd; ++i) {
    const double q = x[i] - shift;
    double value = 0.0, dq = 0.0, dgam = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      const double u = q - P.x(e);
      const double fe = prof.cdf(u);
      const double ge = prof.moment1(u);
      fcol[e] = fe;
      gcol[e] = ge;
      value += (edge_a[e] + q * edge_b[e]) * fe - edge_b[e] * ge;
      if (jac) {
        dq += edge_b[e] * fe;
        if (cfg.fit_gamma) {
          fgam[e] = prof.dcdf_dfwhm(u);
          ggam[e] = prof.dmoment1_dfwhm(u);
          dgam += (edge_a[e] + q * edge_b[e]) * fgam[e] - edge_b[e] * ggam[e];
        }
      }
    }
    const double pz = prof.pdf(q);
    const double model = c * (zpl_w * pz + value);
    r[static_cast<long>(i)] = (model - y[i]) * wgt[i];
    if (jac) {
      pdfq[i] = pz;
      const double wc = wgt[i] * c;
      (*jac)(static_cast<long>(i), 0) =
          -wc * (zpl_w * prof.dpdf_du(q) + dq);
      if (cfg.fit_gamma)
        (*jac)(static_cast<long>(i), 1) =
            wc * gamma * (zpl_w * prof.dpdf_dfwhm(q) + dgam);
      (*jac)(static_cast<long>(i), ic) = wgt[i] * model;
      // Hat integrals of each sideband node against the profile.
      for (std::size_t e = 0; e + 1 < m; ++e) {
        const double df = fcol[e] - fcol[e + 1];
        const double dg = gcol[e] - gcol[e + 1];
        const double xl = P.x(e);
        mrow(static_cast<long>(i), static_cast<long>(e)) +=
            ((xl + h - q) * df + dg) / h;
        mrow(static_cast<long>(i), static_cast<long>(e + 1)) +=
            ((q - xl) * df - dg) / h;
      }
    }
  }

  if (jac) {
    const Eigen::VectorXd conv_b = mrow * bvec;           // d model / dS part
    const Eigen::MatrixXd conv_p = mrow * pprime;         // nd x N
    for (std::size_t i = 0; i < nd; ++i) {
      const double wc = wgt[i] * c;
      (*jac)(static_cast<long>(i), iv) =
          2.0 * v * wc * (conv_b[static_cast<long>(i)] - zpl_w * pdfq[i]);
      for (std::size_t j = 0; j < n_psf; ++j)
        (*jac)(static_cast<long>(i), iu + static_cast<int>(j)) =
            wc * conv_p(static_cast<long>(i), static_cast<long>(j)) *
            s_vals[j];
    }
  }

  // Gauge residual: mean S_j = 1 removes the psf scale null direction.
  double usum = 0.0;
  for (std::size_t j = 0; j < n_psf; ++j) usum += s_vals[j];
  const double invn = 1.0 / static_cast<double>(n_psf);
  r[static_cast<long>(nd)] = usum * invn - 1.0;
  if (jac)
    for (std::size_t j = 0; j < n_psf; ++j)
      (*jac)(static_cast<long>(nd), iu + static_cast<int>(j)) =
          s_vals[j] * invn;

  if (smooth_w > 0.0) {
    for (std::size_t j = 0; j + 1 < n_psf; ++j) {
      const long row = static_cast<long>(nd + 1 + j);
      r[row] = smooth_w * (s_vals[j + 1] - s_vals[j]);
      if (jac) {
        (*jac)(row, iu + static_cast<int>(j)) = -smooth_w * s_vals[j];
        (*jac)(row, iu + static_cast<int>(j) + 1) = smooth_w * s_vals[j + 1];
      }
    }
  }
}

std::vector<double> VibronicResidual::model_at(
    const Eigen::VectorXd& p, const std::vector<double>& q_ev) const {
  const double shift = p[0];
  const double gamma = cfg.fit_gamma ? std::exp(p[1]) : cfg.gamma_fixed_ev;
  const double v = p[iv];
  const double s_hr = v * v;
  const double c = std::exp(p[ic]);
  std::vector<double> s_vals(n_psf);
  for (std::size_t j = 0; j < n_psf; ++j)
    s_vals[j] = std::exp(p[iu + static_cast<int>(j)]);
  Forward fw = build_forward(s_hr, s_vals, n_eval);
  require(fw.valid, Err::EmptySpectralFunction,
          "model not evaluable at these parameters");
  const LineProfile prof(cfg.zpl_shape, gamma);
  const double zpl_w = std::exp(-s_hr);
  const LatticeFn& P = fw.sideband;
  const std::size_t m = P.size();
  const double h = P.step;
  std::vector<double> beta(m, 0.0), edge_a(m), edge_b(m);
  for (std::size_t e = 0; e + 1 < m; ++e)
    beta[e] = (P.values[e + 1] - P.values[e]) / h;
  for (std::size_t e = 0; e < m; ++e) {
    const double x_e = P.x(e);
    const double b_left = e > 0 ? beta[e - 1] : 0.0;
    const double b_right = e + 1 < m ? beta[e] : 0.0;
    const double a_left = e > 0 ? P.values[e - 1] - b_left * (x_e - h) : 0.0;
    edge_a[e] = (P.values[e] - b_right * x_e) - a_left;
    edge_b[e] = b_right - b_left;
  }
  std::vector<double> out(q_ev.size());
  for (std::size_t i = 0; i < q_ev.size(); ++i) {
    const double q = q_ev[i] - shift;
    double value = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      const double u = q - P.x(e);
      value += (edge_a[e] + q * edge_b[e]) * prof.cdf(u) -
               edge_b[e] * prof.moment1(u);
    }
    out[i] = c * (zpl_w * prof.pdf(q) + value);
  }
  return out;
}

}  // namespace

namespace {

// Linear least-squares amplitude for a fixed model shape.
void seed_amplitude(const VibronicResidual& rm, Eigen::VectorXd& p) {
  p[rm.ic] = 0.0;
  std::vector<double> m0 = rm.model_at(p, rm.x);
  double num = 0.0, den = 0.0, ymax = 0.0;
  for (std::size_t i = 0; i < rm.x.size(); ++i) {
    const double w2 = rm.wgt[i] * rm.wgt[i];
    num += w2 * rm.y[i] * m0[i];
    den += w2 * m0[i] * m0[i];
    ymax = std::max(ymax, rm.y[i]);
  }
  double c0 = den > 0.0 ? num / den : 0.0;
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    const double mm = *std::max_element(m0.begin(), m0.end());
    c0 = mm > 0.0 ? ymax / mm : 1.0;
  }
  p[rm.ic] = std::log(c0);
}

// Builds the residual model and its initial parameter vector from the data;
// shared by fit_vibronic and probe_jacobian.
void setup_residual(const spectra::Lineshape& data,
                    const VibronicFitConfig& cfg, double temperature_k,
                    VibronicResidual& rm, Eigen::VectorXd& p0) {
  require(temperature_k > 0.0 && std::isfinite(temperature_k),
          Err::NonPositiveTemperature, "temperature must be positive");
  require(cfg.delta_e_ev > 0.0 && cfg.e_max_ev >= cfg.delta_e_ev,
          Err::NonPositiveEnergy, "psf grid must be positive");
  if (!cfg.fit_gamma)
    require(cfg.gamma_fixed_ev > 0.0, Err::NonPositiveInput,
            "fixed ZPL width must be positive");

  rm.cfg = cfg;
  rm.t_k = temperature_k;
  rm.init_layout();

  // Usable points: finite density with positive finite sigma.
  const std::size_t nd_all = data.size();
  require(nd_all >= 8 && data.density.size() == nd_all &&
              data.sigma.size() == nd_all,
          Err::DegenerateData, "lineshape needs at least 8 consistent points");
  for (std::size_t i = 1; i < nd_all; ++i)
    require(data.delta_e_ev[i] > data.delta_e_ev[i - 1],
            Err::NonMonotonicEdges, "lineshape grid must be increasing");
  for (std::size_t i = 0; i < nd_all; ++i) {
    if (std::isfinite(data.density[i]) && std::isfinite(data.sigma[i]) &&
        data.sigma[i] > 0.0) {
      rm.x.push_back(data.delta_e_ev[i]);
      rm.y.push_back(data.density[i]);
      rm.wgt.push_back(1.0 / data.sigma[i]);
    }
  }
  const std::size_t nd = rm.x.size();
  require(static_cast<int>(nd) > rm.n_params() - 1, Err::DegenerateData,
          "fewer usable points than free parameters");

  // Initialization: ZPL at the density maximum, width from the half-maximum
  // crossings, S from the fraction of the integral inside the ZPL window.
  std::size_t imax = 0;
  for (std::size_t i = 1; i < nd; ++i)
    if (rm.y[i] > rm.y[imax]) imax = i;
  const double shift0 = rm.x[imax];
  const double ymax = rm.y[imax];

  std::vector<double> dx(nd - 1);
  for (std::size_t i = 0; i + 1 < nd; ++i) dx[i] = rm.x[i + 1] - rm.x[i];
  const double med_dx = median(dx);

  double gamma0 = cfg.gamma_fixed_ev;
  {
    // Half-maximum crossings interpolated between samples.  The spacing
    // right at the peak (not the global median: zoned or rebinned grids are
    // much coarser away from the line) floors the estimate when the peak
    // sits on a single sample.
    const double half = 0.5 * ymax;
    double lo = rm.x[imax], hi = rm.x[imax];
    for (std::size_t i = imax; i-- > 0;)
      if (rm.y[i] < half) {
        lo = rm.x[i] + (rm.x[i + 1] - rm.x[i]) * (half - rm.y[i]) /
                           (rm.y[i + 1] - rm.y[i]);
        break;
      }
    for (std::size_t i = imax + 1; i < nd; ++i)
      if (rm.y[i] < half) {
        hi = rm.x[i] - (rm.x[i] - rm.x[i - 1]) * (half - rm.y[i]) /
                           (rm.y[i - 1] - rm.y[i]);
        break;
      }
    double local_dx = med_dx;
    if (imax > 0 && imax + 1 < nd)
      local_dx = 0.5 * (rm.x[imax + 1] - rm.x[imax - 1]);
    else if (imax + 1 < nd)
      local_dx = rm.x[imax + 1] - rm.x[imax];
    else if (imax > 0)
      local_dx = rm.x[imax] - rm.x[imax - 1];
    double est = std::max(hi - lo, 0.5 * local_dx);
    if (!(est > 0.0)) est = 3.0 * med_dx;
    if (cfg.fit_gamma) gamma0 = est;
  }

  require(rm.x.front() <= -3.0 * gamma0 + 1e-15 &&
              rm.x.back() >= cfg.e_max_ev - 1e-15,
          Err::InsufficientSpan,
          "data must cover [-3 Gamma, e_max] around the ZPL hint");

  double s0;
  {
    const double win = std::max(cfg.zpl_window_gammas * gamma0, 2.0 * med_dx);
    double inside = 0.0, total = 0.0;
    for (std::size_t i = 0; i + 1 < nd; ++i) {
      const double seg = 0.5 * (rm.y[i] + rm.y[i + 1]) * dx[i];
      total += seg;
      const double mid = 0.5 * (rm.x[i] + rm.x[i + 1]);
      if (std::fabs(mid - shift0) <= win) inside += seg;
    }
    double frac = total > 0.0 ? inside / total : 1.0;
    frac = std::clamp(frac, 1e-8, 1.0);
    s0 = std::clamp(-std::log(frac), 0.02, 5.0);
  }

  rm.n_eval = cfg.n_max > 0
                  ? cfg.n_max
                  : std::min(auto_n_max(s0, cfg.tail_tol) + 2, 20);
  rm.n_eval = std::max(rm.n_eval, cfg.n_max > 0 ? 1 : 6);

  p0.resize(rm.n_params());
  p0[0] = shift0;
  if (cfg.fit_gamma) p0[1] = std::log(gamma0);
  p0[rm.iv] = std::sqrt(s0);

  // psf seed from the data itself.  Just above the ZPL the density is
  // dominated by the one-phonon sideband, so baseline-subtracted samples at
  // the cell centers, divided by the Bose emission factor, start the cells
  // near the sideband shape.  A flat start instead tends to park multi-mode
  // fits in a stationary point that fills the gaps between modes.
  {
    double floor_mp = 0.0;
    {
      // Multi-phonon floor: the density beyond one-phonon reach.
      std::vector<double> far;
      for (std::size_t i = 0; i < nd; ++i) {
        const double e = rm.x[i] - shift0;
        if (e >= cfg.e_max_ev + 2.0 * gamma0 && e <= 2.0 * cfg.e_max_ev)
          far.push_back(rm.y[i]);
      }
      if (far.size() >= 3) floor_mp = median(far);
    }
    std::vector<double> s_seed(rm.n_psf, 0.0);
    std::vector<char> sampled(rm.n_psf, 0);
    double s_max = 0.0;
    for (std::size_t j = 0; j < rm.n_psf; ++j) {
      const double e = (static_cast<double>(j) + 0.5) * cfg.delta_e_ev;
      const double xq = shift0 + e;
      if (e < 4.0 * gamma0 || xq > rm.x.back()) continue;
      const auto it = std::lower_bound(rm.x.begin(), rm.x.end(), xq);
      const std::size_t k = static_cast<std::size_t>(it - rm.x.begin());
      if (k == 0 || k >= nd) continue;
      const double t = (xq - rm.x[k - 1]) / (rm.x[k] - rm.x[k - 1]);
      const double yq = rm.y[k - 1] + t * (rm.y[k] - rm.y[k - 1]);
      const double s =
          (yq - floor_mp) / (bose_einstein(e, temperature_k) + 1.0);
      s_seed[j] = std::max(s, 0.0);
      sampled[j] = 1;
      s_max = std::max(s_max, s_seed[j]);
    }
    if (s_max > 0.0) {
      // Carry the nearest sampled value into unsampled cells (ZPL core,
      // past the data), then clamp so no cell starts at zero.
      double carry = -1.0;
      std::vector<double> fwd(rm.n_psf, -1.0), bwd(rm.n_psf, -1.0);
      for (std::size_t j = 0; j < rm.n_psf; ++j) {
        if (sampled[j]) carry = s_seed[j];
        fwd[j] = carry;
      }
      carry = -1.0;
      for (std::size_t j = rm.n_psf; j-- > 0;) {
        if (sampled[j]) carry = s_seed[j];
        bwd[j] = carry;
      }
      const double lo = 0.02 * s_max;
      double mean = 0.0;
      for (std::size_t j = 0; j < rm.n_psf; ++j) {
        double v = sampled[j] ? s_seed[j] : std::max(fwd[j], bwd[j]);
        s_seed[j] = std::max(v, lo);
        mean += s_seed[j];
      }
      mean /= static_cast<double>(rm.n_psf);
      for (std::size_t j = 0; j < rm.n_psf; ++j)
        p0[rm.iu + static_cast<int>(j)] = std::log(s_seed[j] / mean);
    } else {
      for (std::size_t j = 0; j < rm.n_psf; ++j)
        p0[rm.iu + static_cast<int>(j)] = 0.0;
    }
  }
  p0[rm.ic] = 0.0;

  seed_amplitude(rm, p0);
}

}  // namespace

JacobianProbe probe_jacobian(const spectra::Lineshape& data,
                             const VibronicFitConfig& cfg,
                             double temperature_k,
                             const Eigen::VectorXd& offset,
                             double fd_step_scale) {
  VibronicResidual rm;
  JacobianProbe out;
  setup_residual(data, cfg, temperature_k, rm, out.point);
  if (offset.size() > 0) {
    require(offset.size() == out.point.size(), Err::DegenerateData,
            "offset must match the parameter count");
    out.point += offset;
  }
  rm.fd_step_scale = fd_step_scale;
  out.residual.resize(rm.n_residuals());
  rm.eval(out.point, out.residual);
  rm.jacobian(out.point, out.analytic);
  rm.lsq::ResidualModel::jacobian(out.point, out.finite_difference);
  return out;
}

VibronicFit fit_vibronic(const spectra::Lineshape& data,
                         const VibronicFitConfig& cfg, double temperature_k) {
  VibronicResidual rm;
  Eigen::VectorXd p0;
  setup_residual(data, cfg, temperature_k, rm, p0);
  const std::size_t nd_all = data.size();
  const std::size_t nd = rm.x.size();

  lsq::Options opt;
  opt.max_iterations = cfg.max_iterations;
  lsq::Result res = lsq::solve(rm, p0, opt);

  // Second deterministic start with a flat psf.  For strongly multi-phonon
  // data the data-driven seed can drift into a nearby stationary point and
  // the flat seed into a different one; keep whichever basin ends lower.
  {
    bool seeded = false;
    for (std::size_t j = 0; j < rm.n_psf; ++j)
      seeded = seeded || p0[rm.iu + static_cast<int>(j)] != 0.0;
    if (seeded) {
      Eigen::VectorXd p1 = p0;
      for (std::size_t j = 0; j < rm.n_psf; ++j)
        p1[rm.iu + static_cast<int>(j)] = 0.0;
      seed_amplitude(rm, p1);
      lsq::Result res2 = lsq::solve(rm, p1, opt);
      if (res2.chi2 < res.chi2) res = std::move(res2);
    }
  }

  // An inflated chi-square after a converged step usually means the psf
  // walked into a zigzag stationary point: adjacent cells trading weight in
  // a region the data constrains only through the ZPL-width average.  One
  // polish pass restarts from the same solution with the cell values
  // smoothed; keep whichever solve ends lower.
  {
    const int dof0 = static_cast<int>(nd) - (rm.n_params() - 1);
    if (dof0 > 0 && res.chi2 > 1.5 * dof0) {
      Eigen::VectorXd p1 = res.params;
      std::vector<double> sv(rm.n_psf);
      for (std::size_t j = 0; j < rm.n_psf; ++j)
        sv[j] = std::exp(res.params[rm.iu + static_cast<int>(j)]);
      double mean = 0.0;
      std::vector<double> sm(rm.n_psf);
      for (std::size_t j = 0; j < rm.n_psf; ++j) {
        const double a = sv[j > 0 ? j - 1 : j];
        const double b = sv[j + 1 < rm.n_psf ? j + 1 : j];
        sm[j] = 0.25 * a + 0.5 * sv[j] + 0.25 * b;
        mean += sm[j];
      }
      mean /= static_cast<double>(rm.n_psf);
      if (mean > 0.0) {
        for (std::size_t j = 0; j < rm.n_psf; ++j)
          p1[rm.iu + static_cast<int>(j)] =
              std::log(std::max(sm[j] / mean, 1e-12));
        lsq::Result res2 = lsq::solve(rm, p1, opt);
        if (res2.chi2 < res.chi2) res = std::move(res2);
      }
    }
  }

  const Eigen::VectorXd& pf = res.params;
  const double shift = pf[0];
  const double gamma = cfg.fit_gamma ? std::exp(pf[1]) : cfg.gamma_fixed_ev;
  const double v = pf[rm.iv];
  const double s_hr = v * v;
  const double c = std::exp(pf[rm.ic]);

  VibronicFit out;
  out.converged = res.converged;
  out.iterations = res.iterations;
  out.amplitude = c;
  out.zpl_weight = std::exp(-s_hr);
  out.params.e_zpl_ev = data.e_zpl_hint_ev - shift;
  out.params.gamma_zpl_ev = gamma;
  out.params.s_hr = s_hr;
  out.params.temperature_k = temperature_k;
  out.params.zpl_shape = cfg.zpl_shape;

  // Reported psf: fitted cell values rescaled so the [0, e_max] integral
  // equals the Huang-Rhys factor (the model only sees the normalized shape).
  PhononSpectralFunction psf;
  psf.delta_e_ev = cfg.delta_e_ev;
  psf.e_max_ev = cfg.e_max_ev;
  psf.values.resize(rm.n_psf);
  std::vector<double> s_fit(rm.n_psf);
  for (std::size_t j = 0; j < rm.n_psf; ++j) {
    s_fit[j] = std::exp(pf[rm.iu + static_cast<int>(j)]);
    psf.values[j] = s_fit[j];
  }
  {
    const double integ = psf.integral();
    const double scale = integ > 0.0 ? s_hr / integ : 0.0;
    for (double& sv : psf.values) sv *= scale;
  }
  out.params.psf = psf;

  // Uncertainties in natural units.
  const Eigen::MatrixXd& cv = res.covariance;
  out.e_zpl_sigma = std::sqrt(std::max(0.0, cv(0, 0)));
  if (cfg.fit_gamma)
    out.gamma_sigma = gamma * std::sqrt(std::max(0.0, cv(1, 1)));
  out.s_hr_sigma =
      2.0 * std::fabs(v) * std::sqrt(std::max(0.0, cv(rm.iv, rm.iv)));
  out.covariance.setZero(3, 3);
  {
    const int ig = cfg.fit_gamma ? 1 : -1;
    const double dz = -1.0, dg = gamma, ds = 2.0 * v;
    out.covariance(0, 0) = dz * cv(0, 0) * dz;
    out.covariance(2, 2) = ds * cv(rm.iv, rm.iv) * ds;
    out.covariance(0, 2) = out.covariance(2, 0) = dz * cv(0, rm.iv) * ds;
    if (ig >= 0) {
      out.covariance(1, 1) = dg * cv(ig, ig) * dg;
      out.covariance(0, 1) = out.covariance(1, 0) = dz * cv(0, ig) * dg;
      out.covariance(1, 2) = out.covariance(2, 1) = dg * cv(ig, rm.iv) * ds;
    }
  }

  // Model and weighted residuals over the full input grid.
  out.model = rm.model_at(pf, data.delta_e_ev);
  out.residuals.assign(nd_all, 0.0);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < nd_all; ++i) {
    if (std::isfinite(data.density[i]) && std::isfinite(data.sigma[i]) &&
        data.sigma[i] > 0.0) {
      out.residuals[i] = (out.model[i] - data.density[i]) / data.sigma[i];
      chi2 += out.residuals[i] * out.residuals[i];
    }
  }
  const int dof =
      static_cast<int>(nd) - (rm.n_params() - 1);  // gauge row eats one
  out.chi2_reduced = dof > 0 ? chi2 / dof : 0.0;

  // n-phonon decomposition at the fitted parameters with the reporting
  // truncation rule.
  out.n_max_used =
      cfg.n_max > 0 ? cfg.n_max : auto_n_max(s_hr, cfg.tail_tol);
  out.params.n_max = out.n_max_used;
  {
    VibronicResidual::Forward fw =
        rm.build_forward(s_hr, s_fit, out.n_max_used);
    if (fw.valid) {
      out.components.resize(static_cast<std::size_t>(out.n_max_used));
      for (int n = 1; n <= out.n_max_used; ++n) {
        auto& comp = out.components[static_cast<std::size_t>(n - 1)];
        comp.n = n;
        comp.weight = fw.weights[static_cast<std::size_t>(n - 1)];
        comp.shape = fw.ladder[static_cast<std::size_t>(n - 1)];
      }
    }
  }
  return out;
}

TemperatureSeriesFit fit_temperature_series(
    const std::vector<std::pair<spectra::Lineshape, double>>& series,
    const VibronicFitConfig& cfg) {
  require(series.size() >= 2, Err::DegenerateSeries,
          "need at least two temperatures");
  TemperatureSeriesFit out;
  out.elements.resize(series.size());
  parallel_for(series.size(), [&](std::size_t i) {
    SeriesElement& el = out.elements[i];
    el.temperature_k = series[i].second;
    try {
      el.fit = fit_vibronic(series[i].first, cfg, series[i].second);
      el.ok = true;
    } catch (const Error& e) {
      el.ok = false;
      el.error = e.what();
    } catch (const std::exception& e) {
      el.ok = false;
      el.error = e.what();
    }
  });

  double wsum = 0.0, wmean = 0.0;
  std::size_t n_ok = 0;
  for (const auto& el : out.elements) {
    if (!el.ok) continue;
    ++n_ok;
    const double sig = std::max(el.fit.s_hr_sigma, 1e-12);
    const double w = 1.0 / (sig * sig);
    wsum += w;
    wmean += w * el.fit.params.s_hr;
  }
  if (n_ok >= 2 && wsum > 0.0) {
    out.s_hr_mean = wmean / wsum;
    out.s_hr_mean_sigma = std::sqrt(1.0 / wsum);
    bool all_within = true;
    for (const auto& el : out.elements) {
      if (!el.ok) continue;
      const double sig = std::max(el.fit.s_hr_sigma, 1e-12);
      const double z = (el.fit.params.s_hr - out.s_hr_mean) / sig;
      out.z_scores.push_back(z);
      if (std::fabs(z) > 3.0) all_within = false;
    }
    out.temperature_independent =
        all_within && n_ok == out.elements.size();
  }
  return out;
}

}  // namespace qekit::vibronic
