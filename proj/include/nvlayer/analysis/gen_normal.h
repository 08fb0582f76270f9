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

#include <string>
#include <vector>

#include <Eigen/Core>

namespace nvlayer {

/// alpha^2 Gamma(3/beta) / Gamma(1/beta): variance of the density exp(-(|x-mu|/alpha)^beta).
double gen_normal_variance(double alpha, double beta);

struct GenNormalPeak {
  double mu = 0.0;
  double alpha = 1.0;
  double beta = 2.0;
  double amplitude = 0.0;  // signed; dips are negative
  double variance = 0.0;
  double variance_sd = 0.0;
};

struct GenNormalOptions {
  // Fit the exp(-lambda (x - x0)) envelope on the baseline; otherwise lambda = 0.
  bool fit_envelope = true;
  // Relative amplitude (of the baseline scale) below which a fitted peak counts as absent.
  double min_relative_amplitude = 1e-9;
};

/// y(x) = c exp(-lambda (x - x0)) + sum_k A_k exp(-(|x - mu_k| / alpha_k)^beta_k), x0 = x.front().
struct GenNormalFit {
  std::vector<GenNormalPeak> peaks;
  double baseline = 0.0;
  double decay_rate = 0.0;
  double x0 = 0.0;
  // Natural parameters (c, lambda, then A, mu, alpha, beta per peak) and their covariance.
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  std::vector<std::string> param_names;
  double rss = 0.0;
  double r2 = 0.0;
  bool converged = false;
  bool degenerate = false;  // some fitted amplitude is negligible
  std::vector<Eigen::VectorXd> seeds;  // internal start vectors, in trial order
  std::size_t best_seed = 0;

  double eval(double x) const;
};

/// Least-squares fit with one or two peaks on a monotone axis. Throws FitError on a flat input
/// or when no start converges; the error carries the best residual.
GenNormalFit fit_generalized_normal(const std::vector<double>& x, const std::vector<double>& y,
                                    int n_peaks = 1, const GenNormalOptions& opt = {});

}  // namespace nvlayer
