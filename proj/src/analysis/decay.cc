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

#include "nvlayer/analysis/decay.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvlayer/analysis/least_squares.h"
#include "nvlayer/constants.h"
#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

double decay_model(double a, double w, double gamma, double n, double b, double cycle) {
  return a * std::cos(w * cycle) * std::exp(-std::pow(gamma * cycle, n)) + b;
}

// Internal parameters: a, log gamma, log n, b.
struct Natural {
  double a, gamma, n, b;
};

Natural natural(const Eigen::VectorXd& p) {
  return {p[0], std::exp(std::clamp(p[1], std::log(1e-9), std::log(50.0))),
          std::exp(std::clamp(p[2], std::log(0.1), std::log(10.0))), p[3]};
}

DecayCandidate fit_form(const std::vector<double>& y, DecayForm form, double theta) {
  const double w = form == DecayForm::kCosTheta ? theta : constants::kPi;
  const std::size_t m = y.size();
  const ResidualFn f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const Natural q = natural(p);
    r.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      r[static_cast<Eigen::Index>(i)] =
          decay_model(q.a, w, q.gamma, q.n, q.b, static_cast<double>(i + 1)) - y[i];
    }
  };
  double mean = 0.0, amax = 0.0;
  for (double v : y) {
    mean += v;
    amax = std::max(amax, std::abs(v));
  }
  mean /= static_cast<double>(m);
  const double c1 = std::cos(w);
  const double a0 = std::abs(c1) > 0.1 ? (y[0] - mean) / c1 : amax;
  std::vector<Eigen::VectorXd> seeds;
  for (double b0 : {0.0, mean}) {
    for (double g0 : {0.002, 0.02, 0.1, 0.5}) {
      for (double n0 : {1.0, 2.0}) {
        Eigen::VectorXd p(4);
        p << (b0 == 0.0 ? y[0] / (std::abs(c1) > 0.1 ? c1 : 1.0) : a0), std::log(g0), std::log(n0), b0;
        seeds.push_back(p);
      }
    }
  }
  const LsqResult res = multistart(f, m, seeds);
  DecayCandidate c;
  c.form = form;
  const Natural q = natural(res.params);
  c.a = q.a;
  c.gamma = q.gamma;
  c.n = q.n;
  c.b = q.b;
  c.rss = res.rss;
  c.converged = res.converged;
  c.seeds = res.starts;
  c.best_seed = res.best_start;
  // d gamma = gamma d(log gamma).
  c.gamma_sd = c.gamma * std::sqrt(std::max(0.0, res.covariance(1, 1)));
  std::vector<double> fit(m);
  for (std::size_t i = 0; i < m; ++i) fit[i] = decay_model(c.a, w, c.gamma, c.n, c.b, static_cast<double>(i + 1));
  c.r2 = r_squared(y, fit);
  return c;
}

}  // namespace

std::string decay_form_name(DecayForm f) { return f == DecayForm::kCosTheta ? "cos_theta" : "cos_pi"; }

double DecayFit::eval(double cycle) const {
  const double w = best.form == DecayForm::kCosTheta ? theta : constants::kPi;
  return decay_model(best.a, w, best.gamma, best.n, best.b, cycle);
}

DecayFit fit_decay(const std::vector<double>& y, double theta, const DecayOptions& opt) {
  if (y.size() < 10) throw DomainError("decay fit needs at least 10 cycles");
  if (opt.window < 10) throw ConfigError("decay fit window must be at least 10 cycles");
  const std::vector<double> head(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(std::min(opt.window, y.size())));
  DecayFit fit;
  fit.theta = theta;
  fit.window = head.size();
  fit.cos_theta = fit_form(head, DecayForm::kCosTheta, theta);
  fit.cos_pi = fit_form(head, DecayForm::kCosPi, theta);
  if (!fit.cos_theta.converged && !fit.cos_pi.converged) {
    throw FitError("neither decay form converged", std::min(fit.cos_theta.rss, fit.cos_pi.rss));
  }
  if (!fit.cos_pi.converged) {
    fit.best = fit.cos_theta;
  } else if (!fit.cos_theta.converged) {
    fit.best = fit.cos_pi;
  } else {
    fit.best = fit.cos_theta.r2 >= fit.cos_pi.r2 ? fit.cos_theta : fit.cos_pi;
  }
  return fit;
}

std::vector<double> baseline_correct(const std::vector<double>& y, const DecayFit& fit) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - fit.best.b;
  return out;
}

}  // namespace nvlayer
