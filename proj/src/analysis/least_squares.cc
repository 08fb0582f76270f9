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

#include "nvlayer/analysis/least_squares.h"

#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

struct Functor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const ResidualFn* f;
  int n, m;
  int inputs() const { return n; }
  int values() const { return m; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    (*f)(x, r);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i])) r[i] = 1e150;
    }
    return 0;
  }
};

}  // namespace

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, std::size_t m, const Eigen::VectorXd& p) {
  const Eigen::Index n = p.size();
  Eigen::MatrixXd j(static_cast<Eigen::Index>(m), n);
  Eigen::VectorXd rp(m), rm(m);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
    Eigen::VectorXd q = p;
    q[k] = p[k] + h;
    f(q, rp);
    q[k] = p[k] - h;
    f(q, rm);
    j.col(k) = (rp - rm) / (2.0 * h);
  }
  return j;
}

Eigen::MatrixXd covariance_from_jacobian(const Eigen::MatrixXd& jac, double rss) {
  const Eigen::Index m = jac.rows(), n = jac.cols();
  const double dof = static_cast<double>(std::max<Eigen::Index>(1, m - n));
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  return (rss / dof) * jtj.completeOrthogonalDecomposition().pseudoInverse();
}

LsqResult levenberg_marquardt(const ResidualFn& f, std::size_t m, const Eigen::VectorXd& x0,
                              const LsqOptions& opt) {
  if (m < static_cast<std::size_t>(x0.size())) {
    throw FitError("fewer residuals than parameters", std::numeric_limits<double>::infinity());
  }
  Functor fn{&f, static_cast<int>(x0.size()), static_cast<int>(m)};
  Eigen::NumericalDiff<Functor> nd(fn);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(nd);
  lm.parameters.maxfev = opt.max_evaluations;
  lm.parameters.ftol = opt.ftol;
  lm.parameters.xtol = opt.xtol;
  Eigen::VectorXd x = x0;
  const auto status = lm.minimize(x);
  LsqResult res;
  res.status = static_cast<int>(status);
  res.evaluations = static_cast<int>(lm.nfev);
  res.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                  status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                  x.allFinite();
  Eigen::VectorXd r(m);
  f(x, r);
  res.rss = r.allFinite() ? r.squaredNorm() : std::numeric_limits<double>::infinity();
  if (!std::isfinite(res.rss)) res.converged = false;
  res.params = x;
  res.covariance = covariance_from_jacobian(numeric_jacobian(f, m, x), res.rss);
  res.starts = {x0};
  return res;
}

LsqResult multistart(const ResidualFn& f, std::size_t m, const std::vector<Eigen::VectorXd>& starts,
                     const LsqOptions& opt) {
  if (starts.empty()) throw FitError("no starting points", std::numeric_limits<double>::infinity());
  LsqResult best;
  bool have = false;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    LsqResult r = levenberg_marquardt(f, m, starts[k], opt);
    const bool better = !have || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.rss < best.rss);
    if (better) {
      best = std::move(r);
      best.best_start = k;
      have = true;
    }
  }
  best.starts = starts;
  return best;
}

double r_squared(const std::vector<double>& y, const std::vector<double>& fit) {
  if (y.size() != fit.size() || y.empty()) throw FitError("R^2 of mismatched series", 0.0);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - fit[i]) * (y[i] - fit[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

LinearFit linear_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size() || x.rows() < x.cols()) {
    throw FitError("linear fit needs at least as many rows as coefficients", 0.0);
  }
  LinearFit lf;
  lf.coef = x.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd fit = x * lf.coef;
  lf.rss = (y - fit).squaredNorm();
  std::vector<double> yy(y.data(), y.data() + y.size()), ff(fit.data(), fit.data() + fit.size());
  lf.r2 = r_squared(yy, ff);
  return lf;
}

LinearFit polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  if (x.size() != y.size()) throw FitError("polyfit of mismatched series", 0.0);
  if (degree < 0) throw DomainError("negative polynomial degree");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), degree + 1);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k, p *= x[i]) a(static_cast<Eigen::Index>(i), k) = p;
    b[static_cast<Eigen::Index>(i)] = y[i];
  }
  return linear_least_squares(a, b);
}

}  // namespace nvlayer
