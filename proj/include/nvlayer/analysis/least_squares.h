// Copyright 2026 The nvlayer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace nvlayer {

/// Residual callback: fills r (size m) for parameters p.
using ResidualFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)>;

struct LsqOptions {
  int max_evaluations = 4000;
  double ftol = 1e-14;
  double xtol = 1e-14;
};

struct LsqResult {
  Eigen::VectorXd params;
  // s^2 (J^T J)^{-1} with s^2 = rss / (m - p); Jacobian by central differences.
  Eigen::MatrixXd covariance;
  double rss = 0.0;
  bool converged = false;
  int status = 0;
  int evaluations = 0;
  std::size_t best_start = 0;
  std::vector<Eigen::VectorXd> starts;  // every seed tried, in order
};

/// Levenberg-Marquardt from one start.
LsqResult levenberg_marquardt(const ResidualFn& f, std::size_t m, const Eigen::VectorXd& x0,
                              const LsqOptions& opt = {});

/// Best converged result over all starts (lowest rss); the non-converged best otherwise.
LsqResult multistart(const ResidualFn& f, std::size_t m, const std::vector<Eigen::VectorXd>& starts,
                     const LsqOptions& opt = {});

/// Central-difference Jacobian of f at p.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, std::size_t m, const Eigen::VectorXd& p);

/// s^2 (J^T J)^+ from a Jacobian and residual sum of squares.
Eigen::MatrixXd covariance_from_jacobian(const Eigen::MatrixXd& jac, double rss);

double r_squared(const std::vector<double>& y, const std::vector<double>& fit);

struct LinearFit {
  Eigen::VectorXd coef;
  double r2 = 0.0;
  double rss = 0.0;
};

/// Ordinary least squares y ~ X coef.
LinearFit linear_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
/// Polynomial coefficients c0 + c1 x + ... + c_deg x^deg.
LinearFit polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree);

}  // namespace nvlayer
