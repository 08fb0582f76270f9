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

enum class DecayForm { kCosTheta, kCosPi };
std::string decay_form_name(DecayForm f);

struct DecayCandidate {
  DecayForm form = DecayForm::kCosTheta;
  double a = 0.0;
  double gamma = 0.0;  // per Floquet cycle
  double n = 1.0;      // stretch exponent
  double b = 0.0;      // baseline
  double r2 = 0.0;
  double rss = 0.0;
  double gamma_sd = 0.0;
  bool converged = false;
  std::vector<Eigen::VectorXd> seeds;
  std::size_t best_seed = 0;
};

/// a cos(w N) exp(-(gamma N)^n) + b with w = theta or pi; N = 1, 2, ... indexes the samples.
struct DecayFit {
  DecayCandidate best;
  DecayCandidate cos_theta;
  DecayCandidate cos_pi;
  double theta = 0.0;
  std::size_t window = 0;

  double eval(double cycle) const;
};

struct DecayOptions {
  // Only the first `window` cycles enter the fit.
  std::size_t window = 40;
};

/// Fits both forms and keeps the one with higher R^2. Throws DomainError for fewer than 10
/// samples, FitError when neither form converges.
DecayFit fit_decay(const std::vector<double>& y, double theta, const DecayOptions& opt = {});

/// y - b for the selected form.
std::vector<double> baseline_correct(const std::vector<double>& y, const DecayFit& fit);

}  // namespace nvlayer
