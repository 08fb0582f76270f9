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

#include "nvlayer/dense/dephasing.h"

#include <cmath>

#include "nvlayer/dense/dense_engine.h"
#include "nvlayer/errors.h"
#include "nvlayer/hamiltonian/builders.h"
#include "nvlayer/util/thread_pool.h"

namespace nvlayer {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

bool diagonal_only(const HamiltonianTerms& h) {
  for (const auto& t : h.terms()) {
    for (const auto& f : t.product) {
      if (f.axis != Axis::Z) return false;
    }
  }
  return true;
}

// Diagonal of sum_t w_t P_t for Z-only strings.
Eigen::VectorXd diagonal_energies(const HamiltonianTerms& h, std::size_t n_sites) {
  const std::size_t d = std::size_t{1} << n_sites;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (const auto& t : h.terms()) {
    std::uint64_t mask = 0;
    for (const auto& f : t.product) mask |= std::uint64_t{1} << f.site;
    const double w = t.pauli_weight();
    for (std::uint64_t j = 0; j < d; ++j) {
      e(static_cast<Eigen::Index>(j)) += (__builtin_popcountll(j & mask) & 1) ? -w : w;
    }
  }
  return e;
}

constexpr std::size_t kSamplesPerChunk = 50;

}  // namespace

std::string sampling_law_name(SamplingLaw law) {
  return law == SamplingLaw::kNormal ? "normal" : "uniform";
}

SamplingLaw parse_sampling_law(const std::string& name) {
  if (name == "normal") return SamplingLaw::kNormal;
  if (name == "uniform") return SamplingLaw::kUniform;
  throw ConfigError("unknown sampling law '" + name + "' (expected normal or uniform)");
}

double DephasingModel::envelope(double t) const {
  const double s = scale() * t;
  if (s == 0.0) return 1.0;
  if (law == SamplingLaw::kNormal) return std::exp(-0.5 * s * s);
  const double a = std::sqrt(3.0) * s;
  return std::sin(a) / a;
}

DetuningStream::DetuningStream(const DephasingModel& model, std::uint64_t path)
    : law_(model.law),
      sigma_(model.scale()),
      common_(model.common_mode),
      rng_(splitmix64(model.seed ^ splitmix64(path + 0x5bd1e995ull))) {}

void DetuningStream::draw(std::vector<double>& out, std::size_t n_sites) {
  out.resize(n_sites);
  const auto one = [&]() {
    if (sigma_ == 0.0) return 0.0;
    if (law_ == SamplingLaw::kNormal) return std::normal_distribution<double>(0.0, sigma_)(rng_);
    const double half = std::sqrt(3.0) * sigma_;
    return std::uniform_real_distribution<double>(-half, half)(rng_);
  };
  if (common_) {
    const double d = one();
    for (auto& v : out) v = d;
  } else {
    for (auto& v : out) v = one();
  }
}

void dephased_free_evolution(CMat& rho, const HamiltonianTerms& h, std::size_t n_sites,
                             const std::vector<std::uint32_t>& sites, double t,
                             std::vector<DetuningStream>& streams, ThreadPool* pool,
                             std::vector<double>* draws_path0) {
  const std::size_t S = streams.size();
  if (S == 0) throw ConfigError("dephasing needs at least one sample path");
  std::vector<std::vector<double>> draws(S);
  for (std::size_t s = 0; s < S; ++s) streams[s].draw(draws[s], sites.size());
  if (draws_path0) *draws_path0 = draws[0];

  const bool diag = diagonal_only(h);
  const Eigen::VectorXd e0 = diag ? diagonal_energies(h, n_sites) : Eigen::VectorXd();
  const std::size_t n_chunks = (S + kSamplesPerChunk - 1) / kSamplesPerChunk;
  std::vector<CMat> partial(n_chunks);
  const auto work = [&](std::size_t c) {
    CMat acc = CMat::Zero(rho.rows(), rho.cols());
    for (std::size_t s = c * kSamplesPerChunk; s < std::min(S, (c + 1) * kSamplesPerChunk); ++s) {
      const HamiltonianTerms d = detuning_terms(n_sites, sites, draws[s]);
      if (diag) {
        const Eigen::VectorXd e = e0 + diagonal_energies(d, n_sites);
        Eigen::VectorXcd ph(e.size());
        for (Eigen::Index i = 0; i < e.size(); ++i) ph(i) = std::polar(1.0, -e(i) * t);
        acc.noalias() += ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
      } else {
        DensePropagator p(h.plus(d), n_sites, n_sites);
        CMat r = rho;
        p.evolve(r, t);
        acc += r;
      }
    }
    partial[c] = std::move(acc);
  };
  if (pool) {
    pool->parallel_for(n_chunks, work);
  } else {
    for (std::size_t c = 0; c < n_chunks; ++c) work(c);
  }
  CMat total = CMat::Zero(rho.rows(), rho.cols());
  for (const auto& p : partial) total += p;
  rho = total / static_cast<double>(S);
}

}  // namespace nvlayer
