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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nvlayer/pauli/pauli_string.h"

namespace nvlayer {

/// One Hamiltonian term. The coefficient (rad/s) multiplies the product of spin-1/2
/// operators s_a = sigma_a / 2 on the listed sites, so the Pauli-basis weight is
/// coefficient / 2^weight.
struct Term {
  PauliString product;
  double coefficient = 0.0;

  double pauli_weight() const {
    return coefficient / static_cast<double>(1u << product.weight());
  }
};

/// Canonically sorted, merged list of real-coefficient terms. Immutable once built.
class HamiltonianTerms {
 public:
  class Builder {
   public:
    explicit Builder(std::size_t num_sites) : num_sites_(num_sites) {}
    /// Accumulates coefficient onto `product`; identity contributions are discarded.
    Builder& add(const PauliString& product, double coefficient);
    Builder& add_all(const HamiltonianTerms& other, double scale = 1.0);
    HamiltonianTerms build(double drop_below = kNegligible) const;

   private:
    std::size_t num_sites_;
    std::map<PauliString, double> acc_;
  };

  // Coefficients below this magnitude (rad/s) are dropped on build.
  static constexpr double kNegligible = 1e-9;

  HamiltonianTerms() = default;

  std::size_t num_sites() const { return num_sites_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  HamiltonianTerms scaled(double alpha) const;
  HamiltonianTerms plus(const HamiltonianTerms& other) const;

  /// Largest absolute Pauli weight, a cheap scale for step heuristics.
  double max_abs_pauli_weight() const;
  /// Any term acting on the given site with an axis other than Z.
  bool has_transverse_on(std::uint32_t site) const;

  /// One line per term, "sites axes coefficient_rad_per_s", canonical order.
  std::string to_text() const;
  /// Hash of the exact term list (FNV-1a over sites, axes and coefficient bits).
  std::uint64_t hash() const;

  friend bool operator==(const HamiltonianTerms& a, const HamiltonianTerms& b);

 private:
  std::size_t num_sites_ = 0;
  std::vector<Term> terms_;
};

}  // namespace nvlayer
