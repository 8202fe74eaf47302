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

#include "qekit/least_squares.hpp"

#include <cmath>
#include <limits>

namespace qekit::lsq {

void ResidualModel::jacobian(const Eigen::VectorXd& p,
                             Eigen::MatrixXd& jac) const {
  const int np = n_params();
  const int nr = n_residuals();
  jac.resize(nr, np);
  Eigen::VectorXd hi(nr), lo(nr), q = p;
  for (int j = 0; j < np; ++j) {
    const double h = fd_step_scale * std::max(std::fabs(p[j]), 1.0);
    q[j] = p[j] + h;
    eval(q, hi);
    q[j] = p[j] - h;
    eval(q, lo);
    q[j] = p[j];
    jac.col(j) = (hi - lo) / (2.0 * h);
  }
}

namespace {

double cost_of(const Eigen::VectorXd& r) {
  double c = r.squaredNorm();
  return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

}  // namespace

Result solve(const ResidualModel& model, const Eigen::VectorXd& p0,
             const Options& opt) {
  const int np = model.n_params();
  Result out;
  Eigen::VectorXd p = p0;
  Eigen::VectorXd r;
  model.eval(p, r);
  double cost = cost_of(r);

  Eigen::MatrixXd jac;
  Eigen::MatrixXd hess(np, np);
  Eigen::VectorXd grad(np);
  double lambda = opt.lambda_init;
  double nu = 2.0;
  bool need_jacobian = true;
  bool converged = false;
  int it = 0;

  while (it < opt.max_iterations && !converged) {
    if (need_jacobian) {
      model.jacobian(p, jac);
      ++it;
      hess.noalias() = jac.transpose() * jac;
      grad.noalias() = jac.transpose() * r;
      need_jacobian = false;
    }

    Eigen::MatrixXd damped = hess;
    for (int i = 0; i < np; ++i) {
      double d = hess(i, i);
      damped(i, i) = d + lambda * std::max(d, 1e-12);
    }
    Eigen::VectorXd step = damped.ldlt().solve(-grad);
    if (!step.allFinite()) {
      lambda *= nu;
      nu *= 2.0;
      continue;
    }

    Eigen::VectorXd p_try = p + step;
    Eigen::VectorXd r_try;
    model.eval(p_try, r_try);
    double cost_try = cost_of(r_try);

    if (cost_try < cost) {
      const double drop = cost - cost_try;
      const double step_norm = step.norm();
      p = p_try;
      r = r_try;
      cost = cost_try;
      lambda = std::max(lambda / 3.0, 1e-14);
      nu = 2.0;
      need_jacobian = true;
      // A tiny drop only signals the optimum when the step was essentially
      // undamped; at elevated lambda it merely reflects the damping.
      if ((drop <= opt.cost_rel_tol * std::max(cost, 1e-300) ||
           step_norm <= opt.step_tol * (1.0 + p.norm())) &&
          lambda <= opt.lambda_init)
        converged = true;
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (lambda > 1e14) {
        // Damping saturated: no descent direction left at double precision.
        converged = cost_try <= cost * (1.0 + 1e-12);
        break;
      }
    }
  }

  out.params = p;
  out.residuals = r;
  out.chi2 = cost;
  out.iterations = it;
  out.converged = converged;

  model.jacobian(p, jac);
  hess.noalias() = jac.transpose() * jac;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(hess);
  out.covariance = cod.pseudoInverse();
  return out;
}

}  // namespace qekit::lsq
