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

#ifndef QEKIT_LEAST_SQUARES_HPP
#define QEKIT_LEAST_SQUARES_HPP

#include <Eigen/Dense>

namespace qekit::lsq {

struct Options {
  int max_iterations = 500;
  double cost_rel_tol = 1e-10;   // relative chi2 decrease on an accepted step
  double step_tol = 1e-12;       // step norm relative to 1 + |p|
  double lambda_init = 1e-3;
  double fd_step_scale = 6e-6;   // central-difference step, relative
};

struct Result {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;     // (J^T J)^-1 at the solution
  Eigen::VectorXd residuals;      // weighted residuals at the solution
  double chi2 = 0.0;              // sum of squared weighted residuals
  int iterations = 0;             // Jacobian evaluations
  bool converged = false;
};

/// Weighted residual vector r(p); the solver minimizes |r|^2.  Residuals are
/// expected to carry their 1/sigma weights already.
class ResidualModel {
 public:
  virtual ~ResidualModel() = default;
  virtual int n_params() const = 0;
  virtual int n_residuals() const = 0;
  virtual void eval(const Eigen::VectorXd& p, Eigen::VectorXd& r) const = 0;

  /// Central finite differences by default; override for analytic columns.
  virtual void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const;

  double fd_step_scale = 6e-6;
};

/// Levenberg-Marquardt with multiplicative damping on the normal equations.
/// Deterministic: identical inputs produce bit-identical iterates.
Result solve(const ResidualModel& model, const Eigen::VectorXd& p0,
             const Options& opt = {});

}  // namespace qekit::lsq

#endif  // QEKIT_LEAST_SQUARES_HPP
