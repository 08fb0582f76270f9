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

#include "nvlayer/analysis/gen_normal.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvlayer/analysis/least_squares.h"
#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

double log_variance(double alpha, double beta) {
  return 2.0 * std::log(alpha) + std::lgamma(3.0 / beta) - std::lgamma(1.0 / beta);
}

double peak_shape(double x, double mu, double alpha, double beta) {
  return std::exp(-std::pow(std::abs(x - mu) / alpha, beta));
}

// Natural parameter vector: c, lambda, (A, mu, alpha, beta) * n.
double model(const Eigen::VectorXd& q, double x, double x0, int n_peaks) {
  double y = q[0] * std::exp(-q[1] * (x - x0));
  for (int k = 0; k < n_peaks; ++k) {
    const Eigen::Index o = 2 + 4 * k;
    y += q[o] * peak_shape(x, q[o + 1], q[o + 2], q[o + 3]);
  }
  return y;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct PeakGuess {
  double amplitude, mu, halfwidth;
};

PeakGuess find_peak(const std::vector<double>& x, const std::vector<double>& r) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (std::abs(r[i]) > std::abs(r[k])) k = i;
  }
  const double half = 0.5 * std::abs(r[k]);
  std::size_t lo = k, hi = k;
  while (lo > 0 && std::abs(r[lo - 1]) > half && r[lo - 1] * r[k] > 0) --lo;
  while (hi + 1 < r.size() && std::abs(r[hi + 1]) > half && r[hi + 1] * r[k] > 0) ++hi;
  const double dx = std::abs(x.back() - x.front()) / static_cast<double>(std::max<std::size_t>(1, x.size() - 1));
  const double hw = std::max(0.5 * std::abs(x[hi] - x[lo]), 0.5 * dx);
  return {r[k], x[k], hw};
}

}  // namespace

double gen_normal_variance(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("generalized normal needs alpha, beta > 0");
  return std::exp(log_variance(alpha, beta));
}

double GenNormalFit::eval(double x) const {
  double y = baseline * std::exp(-decay_rate * (x - x0));
  for (const auto& p : peaks) y += p.amplitude * peak_shape(x, p.mu, p.alpha, p.beta);
  return y;
}

GenNormalFit fit_generalized_normal(const std::vector<double>& x, const std::vector<double>& y,
                                    int n_peaks, const GenNormalOptions& opt) {
  if (n_peaks != 1 && n_peaks != 2) throw ConfigError("n_peaks must be 1 or 2");
  if (x.size() != y.size()) throw ConfigError("spectrum axis and values differ in length");
  const std::size_t m = x.size();
  const std::size_t n_params = 2 + 4 * static_cast<std::size_t>(n_peaks);
  if (m < n_params + 1) throw FitError("too few spectrum points for the fit", 0.0);
  for (std::size_t i = 1; i < m; ++i) {
    if (!(x[i] > x[i - 1]) && !(x[i] < x[i - 1])) throw ConfigError("spectrum axis must be strictly monotone");
    if ((x[i] - x[i - 1]) * (x[1] - x[0]) < 0.0) throw ConfigError("spectrum axis must be strictly monotone");
  }
  const double x0 = x.front();
  const double c0 = median(y);
  std::vector<double> r(m);
  double rmax = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    r[i] = y[i] - c0;
    rmax = std::max(rmax, std::abs(r[i]));
  }
  const double scale = std::max(1.0, std::abs(c0));
  if (rmax <= 1e-12 * scale) {
    double rss = 0.0;
    for (double v : r) rss += v * v;
    throw FitError("flat spectrum: no peak to fit", rss);
  }

  std::vector<PeakGuess> guesses;
  guesses.push_back(find_peak(x, r));
  if (n_peaks == 2) {
    std::vector<double> r2 = r;
    const auto& g = guesses[0];
    for (std::size_t i = 0; i < m; ++i) {
      r2[i] -= g.amplitude * peak_shape(x[i], g.mu, g.halfwidth / std::sqrt(std::log(2.0)), 2.0);
    }
    guesses.push_back(find_peak(x, r2));
  }

  // Internal vector: c, lambda, (A, mu, log alpha, log beta) per peak.
  const bool env = opt.fit_envelope;
  const auto to_natural = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd q(static_cast<Eigen::Index>(n_params));
    q[0] = p[0];
    q[1] = env ? p[1] : 0.0;
    for (int k = 0; k < n_peaks; ++k) {
      const Eigen::Index o = 2 + 4 * k;
      q[o] = p[o];
      q[o + 1] = p[o + 1];
      q[o + 2] = std::exp(std::clamp(p[o + 2], -300.0, 300.0));
      q[o + 3] = std::exp(std::clamp(p[o + 3], std::log(0.05), std::log(50.0)));
    }
    return q;
  };
  const ResidualFn natural_residual = [&](const Eigen::VectorXd& q, Eigen::VectorXd& res) {
    res.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) res[static_cast<Eigen::Index>(i)] = model(q, x[i], x0, n_peaks) - y[i];
  };
  const ResidualFn internal_residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& res) {
    natural_residual(to_natural(p), res);
  };

  std::vector<Eigen::VectorXd> seeds;
  for (double beta0 : {2.0, 1.0, 4.0}) {
    for (double wmul : {1.0, 0.6, 1.6}) {
      Eigen::VectorXd p(static_cast<Eigen::Index>(n_params));
      p[0] = c0;
      p[1] = 0.0;
      for (int k = 0; k < n_peaks; ++k) {
        const auto& g = guesses[static_cast<std::size_t>(k)];
        const Eigen::Index o = 2 + 4 * k;
        p[o] = g.amplitude;
        p[o + 1] = g.mu;
        p[o + 2] = std::log(wmul * g.halfwidth / std::pow(std::log(2.0), 1.0 / beta0));
        p[o + 3] = std::log(beta0);
      }
      seeds.push_back(p);
    }
  }
  LsqResult best = multistart(internal_residual, m, seeds);
  if (!best.converged) throw FitError("generalized normal fit did not converge", best.rss);

  GenNormalFit fit;
  fit.x0 = x0;
  fit.params = to_natural(best.params);
  fit.rss = best.rss;
  fit.converged = true;
  fit.seeds = best.starts;
  fit.best_seed = best.best_start;
  fit.baseline = fit.params[0];
  fit.decay_rate = fit.params[1];
  fit.param_names = {"baseline", "decay_rate"};

  // Covariance over natural parameters; lambda is excluded when it was held at zero.
  {
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n_params); ++k) {
      if (k == 1 && !env) continue;
      free_idx.push_back(k);
    }
    const ResidualFn sub = [&](const Eigen::VectorXd& s, Eigen::VectorXd& res) {
      Eigen::VectorXd q = fit.params;
      for (std::size_t k = 0; k < free_idx.size(); ++k) q[free_idx[k]] = s[static_cast<Eigen::Index>(k)];
      natural_residual(q, res);
    };
    Eigen::VectorXd s(static_cast<Eigen::Index>(free_idx.size()));
    for (std::size_t k = 0; k < free_idx.size(); ++k) s[static_cast<Eigen::Index>(k)] = fit.params[free_idx[k]];
    const Eigen::MatrixXd cs = covariance_from_jacobian(numeric_jacobian(sub, m, s), fit.rss);
    fit.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_params), static_cast<Eigen::Index>(n_params));
    for (std::size_t a = 0; a < free_idx.size(); ++a) {
      for (std::size_t b = 0; b < free_idx.size(); ++b) {
        fit.covariance(free_idx[a], free_idx[b]) = cs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
  }

  std::vector<double> yfit(m);
  for (std::size_t i = 0; i < m; ++i) yfit[i] = model(fit.params, x[i], x0, n_peaks);
  fit.r2 = r_squared(y, yfit);

  for (int k = 0; k < n_peaks; ++k) {
    const Eigen::Index o = 2 + 4 * k;
    GenNormalPeak pk;
    pk.amplitude = fit.params[o];
    pk.mu = fit.params[o + 1];
    pk.alpha = fit.params[o + 2];
    pk.beta = fit.params[o + 3];
    pk.variance = gen_normal_variance(pk.alpha, pk.beta);
    // Delta method on v(alpha, beta).
    const double dv_da = 2.0 * pk.variance / pk.alpha;
    const double hb = 1e-6 * pk.beta;
    const double dv_db = pk.variance *
                         (log_variance(pk.alpha, pk.beta + hb) - log_variance(pk.alpha, pk.beta - hb)) / (2.0 * hb);
    const double var = dv_da * dv_da * fit.covariance(o + 2, o + 2) +
                       2.0 * dv_da * dv_db * fit.covariance(o + 2, o + 3) +
                       dv_db * dv_db * fit.covariance(o + 3, o + 3);
    pk.variance_sd = std::sqrt(std::max(0.0, var));
    if (std::abs(pk.amplitude) < opt.min_relative_amplitude * scale) fit.degenerate = true;
    fit.peaks.push_back(pk);
    const std::string s = "peak" + std::to_string(k) + "_";
    fit.param_names.push_back(s + "amplitude");
    fit.param_names.push_back(s + "mu");
    fit.param_names.push_back(s + "alpha");
    fit.param_names.push_back(s + "beta");
  }
  return fit;
}

}  // namespace nvlayer
