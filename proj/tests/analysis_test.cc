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
#include <cmath>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "nvlayer/analysis/decay.h"
#include "nvlayer/analysis/gen_normal.h"
#include "nvlayer/analysis/least_squares.h"
#include "nvlayer/analysis/spectral.h"
#include "nvlayer/analysis/transfer.h"
#include "nvlayer/constants.h"
#include "nvlayer/errors.h"

using namespace nvlayer;

namespace {

// Variance of the generalized normal density by direct quadrature.
double quadrature_variance(double alpha, double beta) {
  const double lim = alpha * std::pow(60.0, 1.0 / beta);
  const int n = 400000;
  double m0 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -lim + (i + 0.5) * 2.0 * lim / n;
    const double w = std::exp(-std::pow(std::abs(x) / alpha, beta));
    m0 += w;
    m2 += x * x * w;
  }
  return m2 / m0;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

}  // namespace

TEST(least_squares, levenberg_marquardt_recovers_exponential) {
  const auto x = linspace(0.0, 4.0, 40);
  std::vector<double> y;
  for (double v : x) y.push_back(2.5 * std::exp(-0.7 * v) + 0.3);
  const ResidualFn f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = p[0] * std::exp(-p[1] * x[i]) + p[2] - y[i];
  };
  const LsqResult res = levenberg_marquardt(f, x.size(), Eigen::Vector3d(1.0, 0.2, 0.0));
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.params[0], 2.5, 1e-8);
  EXPECT_NEAR(res.params[1], 0.7, 1e-8);
  EXPECT_NEAR(res.params[2], 0.3, 1e-8);
  EXPECT_LT(res.rss, 1e-16);
  const LsqResult ms = multistart(f, x.size(), {Eigen::Vector3d(-5, 30, 5), Eigen::Vector3d(1.0, 0.2, 0.0)});
  EXPECT_EQ(ms.starts.size(), 2u);
  EXPECT_NEAR(ms.params[1], 0.7, 1e-8);
}

TEST(least_squares, covariance_matches_linear_theory) {
  // For a linear model the covariance is s^2 (X^T X)^{-1} exactly.
  const auto x = linspace(-1.0, 1.0, 21);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 0.01);
  std::vector<double> y;
  for (double v : x) y.push_back(1.0 + 2.0 * v + nd(rng));
  const ResidualFn f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = p[0] + p[1] * x[i] - y[i];
  };
  const LsqResult res = levenberg_marquardt(f, x.size(), Eigen::Vector2d(0.0, 0.0));
  Eigen::MatrixXd X(x.size(), 2);
  for (std::size_t i = 0; i < x.size(); ++i) X.row(i) << 1.0, x[i];
  const Eigen::MatrixXd ref = res.rss / (x.size() - 2.0) * (X.transpose() * X).inverse();
  EXPECT_LE((res.covariance - ref).cwiseAbs().maxCoeff(), 1e-6 * ref.cwiseAbs().maxCoeff());
}

TEST(least_squares, polyfit_and_r_squared) {
  const auto x = linspace(-2.0, 3.0, 15);
  std::vector<double> y;
  for (double v : x) y.push_back(0.5 - 1.5 * v + 0.25 * v * v);
  const LinearFit p = polyfit(x, y, 2);
  EXPECT_NEAR(p.coef[0], 0.5, 1e-12);
  EXPECT_NEAR(p.coef[1], -1.5, 1e-12);
  EXPECT_NEAR(p.coef[2], 0.25, 1e-12);
  EXPECT_NEAR(p.r2, 1.0, 1e-12);
  EXPECT_NEAR(r_squared({1, 2, 3}, {2, 2, 2}), 0.0, 1e-15);
  EXPECT_NEAR(r_squared({1, 2, 3}, {1, 2, 3}), 1.0, 1e-15);
}

TEST(gen_normal, variance_matches_quadrature) {
  for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{3.5, 1.3}, std::pair{0.2, 4.0}, std::pair{10.0, 0.8}}) {
    EXPECT_NEAR(gen_normal_variance(a, b) / quadrature_variance(a, b), 1.0, 1e-6) << a << " " << b;
  }
  EXPECT_NEAR(gen_normal_variance(std::sqrt(2.0), 2.0), 1.0, 1e-14);
  EXPECT_THROW(gen_normal_variance(0.0, 2.0), DomainError);
}

TEST(gen_normal, fit_recovers_peak_on_decaying_baseline) {
  const auto x = linspace(1480.0, 1640.0, 81);  // ns
  const double mu = 1562.0, alpha = 14.0, beta = 2.6, amp = -0.08;
  std::vector<double> y;
  for (double v : x) y.push_back(0.9 * std::exp(-2e-4 * (v - x[0])) + amp * std::exp(-std::pow(std::abs(v - mu) / alpha, beta)));
  const GenNormalFit fit = fit_generalized_normal(x, y, 1);
  ASSERT_EQ(fit.peaks.size(), 1u);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.peaks[0].mu, mu, 1e-4);
  EXPECT_NEAR(fit.peaks[0].amplitude, amp, 1e-6);
  EXPECT_NEAR(fit.peaks[0].variance, gen_normal_variance(alpha, beta), 1e-3);
  EXPECT_GT(fit.r2, 0.999999);
  EXPECT_NEAR(fit.eval(mu), y[41], 1e-3);
  EXPECT_EQ(fit.param_names.size(), 6u);
}

TEST(gen_normal, two_peaks) {
  const auto x = linspace(0.0, 100.0, 201);
  std::vector<double> y;
  for (double v : x) {
    y.push_back(1.0 - 0.3 * std::exp(-std::pow(std::abs(v - 30) / 5, 2.0)) -
                0.2 * std::exp(-std::pow(std::abs(v - 70) / 7, 2.0)));
  }
  GenNormalOptions opt;
  opt.fit_envelope = false;
  const GenNormalFit fit = fit_generalized_normal(x, y, 2, opt);
  ASSERT_EQ(fit.peaks.size(), 2u);
  double m0 = std::min(fit.peaks[0].mu, fit.peaks[1].mu), m1 = std::max(fit.peaks[0].mu, fit.peaks[1].mu);
  EXPECT_NEAR(m0, 30.0, 1e-3);
  EXPECT_NEAR(m1, 70.0, 1e-3);
}

TEST(gen_normal, rejects_flat_and_bad_input) {
  const auto x = linspace(0.0, 1.0, 30);
  const std::vector<double> flat(30, 0.5);
  EXPECT_THROW(fit_generalized_normal(x, flat, 1), FitError);
  EXPECT_THROW(fit_generalized_normal(x, flat, 3), ConfigError);
  EXPECT_THROW(fit_generalized_normal({0, 1, 2}, {1, 1, 1}, 1), FitError);
  std::vector<double> bad = x;
  bad[5] = bad[4];
  EXPECT_THROW(fit_generalized_normal(bad, flat, 1), ConfigError);
}

TEST(transfer, closed_form_and_domain) {
  const TransferFunction tf;
  EXPECT_NEAR(tf.eval(100.0), 2.222 * std::pow(85.13, -0.221) + 0.095, 1e-12);
  EXPECT_THROW(tf.eval(14.87), DomainError);
  EXPECT_THROW(tf.derivative(10.0), DomainError);
  const double h = 1e-5;
  EXPECT_NEAR(tf.derivative(40.0), (tf.eval(40.0 + h) - tf.eval(40.0 - h)) / (2 * h), 1e-8);
  // The range cut-off corresponds to 1.5 nm.
  EXPECT_NEAR(tf.eval(tf.cutoff_variance), 1.5, 0.01);
}

TEST(transfer, error_propagation_matches_finite_differences) {
  const TransferFunction tf;
  const double v = 60.0, sd_v = 4.0;
  const auto d_of = [&](TransferFunction t) { return t.eval(v); };
  const auto grad = [&](double TransferFunction::*m) {
    TransferFunction p = tf, q = tf;
    const double h = 1e-6 * std::max(1.0, std::abs(tf.*m));
    p.*m += h;
    q.*m -= h;
    return (d_of(p) - d_of(q)) / (2 * h);
  };
  double var = std::pow(tf.derivative(v) * sd_v, 2);
  const DistanceEstimate bare = distance_from_variance(v, sd_v, tf, false);
  EXPECT_NEAR(bare.sd_nm, std::sqrt(var), 1e-12);
  var += std::pow(grad(&TransferFunction::a) * tf.sd_a, 2) + std::pow(grad(&TransferFunction::b) * tf.sd_b, 2) +
         std::pow(grad(&TransferFunction::v0) * tf.sd_v0, 2) + std::pow(grad(&TransferFunction::d0) * tf.sd_d0, 2);
  const DistanceEstimate full = distance_from_variance(v, sd_v, tf, true);
  EXPECT_NEAR(full.sd_nm, std::sqrt(var), 1e-7);
  EXPECT_TRUE(full.in_range);
  EXPECT_FALSE(distance_from_variance(20.0, 1.0, tf).in_range);
}

TEST(spectral, parseval_and_padding) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (std::size_t n : {16u, 17u}) {
    std::vector<double> x(n);
    double e = 0.0;
    for (auto& v : x) {
      v = nd(rng);
      e += v * v;
    }
    const PowerSpectrum s = psd(x);
    double total = 0.0;
    for (double p : s.power) total += p;
    EXPECT_NEAR(total, e, 1e-12 * e);
    EXPECT_EQ(psd(x, 64).n_fft, 64u);
  }
  EXPECT_THROW(psd({1, 2, 3}), DomainError);
}

TEST(spectral, peak_frequency_interpolates) {
  std::vector<double> x;
  const double nu = 0.2137;
  for (int k = 0; k < 200; ++k) x.push_back(std::cos(constants::kTwoPi * nu * k));
  const PowerSpectrum s = psd(x, 4096);
  EXPECT_NEAR(peak_frequency(s), nu, 2e-4);
  EXPECT_THROW(peak_frequency(s, 0.6, 0.7), DomainError);
}

TEST(spectral, crystalline_fraction_limits) {
  std::vector<double> alt, flat, mix;
  for (int k = 0; k < 40; ++k) {
    alt.push_back(k % 2 ? 1.0 : -1.0);
    flat.push_back(0.7);
    mix.push_back((k % 2 ? 1.0 : -1.0) * std::exp(-0.05 * k));
  }
  EXPECT_NEAR(crystalline_fraction(alt), 1.0, 1e-15);
  EXPECT_NEAR(crystalline_fraction(flat), 0.0, 1e-15);
  // Direct sums as the oracle.
  double half = 0.0, total = 0.0;
  for (int k = 0; k < 40; ++k) half += mix[k] * (k % 2 ? -1.0 : 1.0);
  for (int q = 0; q < 40; ++q) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < 40; ++k) acc += mix[k] * std::polar(1.0, -constants::kTwoPi * q * k / 40.0);
    total += std::pow(std::norm(acc), 2);
  }
  EXPECT_NEAR(crystalline_fraction(mix), std::pow(half * half, 2) / total, 1e-12);
  CrystallineOptions plain;
  plain.squared = false;
  EXPECT_LT(crystalline_fraction(mix, plain), crystalline_fraction(mix));
  EXPECT_THROW(crystalline_fraction(std::vector<double>(40, 0.0)), DomainError);
}

TEST(decay, recovers_stretched_exponential) {
  const double theta = 1.03 * constants::kPi;
  std::vector<double> y;
  for (int c = 1; c <= 40; ++c) y.push_back(0.95 * std::cos(theta * c) * std::exp(-std::pow(0.04 * c, 1.5)) + 0.01);
  const DecayFit fit = fit_decay(y, theta);
  EXPECT_EQ(fit.best.form, DecayForm::kCosTheta);
  EXPECT_NEAR(fit.best.gamma, 0.04, 1e-5);
  EXPECT_NEAR(fit.best.n, 1.5, 1e-3);
  EXPECT_NEAR(fit.best.b, 0.01, 1e-5);
  EXPECT_GT(fit.best.r2, 0.99999);
  EXPECT_NEAR(fit.eval(7), y[6], 1e-5);
  const auto corrected = baseline_correct(y, fit);
  EXPECT_NEAR(corrected[0], y[0] - fit.best.b, 1e-15);
  EXPECT_EQ(decay_form_name(DecayForm::kCosPi), "cos_pi");
}
