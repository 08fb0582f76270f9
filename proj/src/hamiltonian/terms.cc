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

#include "nvlayer/hamiltonian/terms.h"

#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "nvlayer/errors.h"

namespace nvlayer {

HamiltonianTerms::Builder& HamiltonianTerms::Builder::add(const PauliString& product,
                                                          double coefficient) {
  if (product.is_identity()) return *this;
  if (product.max_site() >= num_sites_) {
    throw ConfigError("term " + product.str() + " exceeds site count " +
                      std::to_string(num_sites_));
  }
  acc_[product] += coefficient;
  return *this;
}

HamiltonianTerms::Builder& HamiltonianTerms::Builder::add_all(const HamiltonianTerms& other,
                                                              double scale) {
  for (const auto& t : other.terms()) add(t.product, scale * t.coefficient);
  return *this;
}

HamiltonianTerms HamiltonianTerms::Builder::build(double drop_below) const {
  HamiltonianTerms h;
  h.num_sites_ = num_sites_;
  h.terms_.reserve(acc_.size());
  for (const auto& [p, c] : acc_) {
    if (std::abs(c) >= drop_below) h.terms_.push_back(Term{p, c});
  }
  return h;
}

HamiltonianTerms HamiltonianTerms::scaled(double alpha) const {
  HamiltonianTerms h = *this;
  for (auto& t : h.terms_) t.coefficient *= alpha;
  return h;
}

HamiltonianTerms HamiltonianTerms::plus(const HamiltonianTerms& other) const {
  Builder b(std::max(num_sites_, other.num_sites_));
  b.add_all(*this).add_all(other);
  return b.build(0.0);
}

double HamiltonianTerms::max_abs_pauli_weight() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.pauli_weight()));
  return m;
}

bool HamiltonianTerms::has_transverse_on(std::uint32_t site) const {
  for (const auto& t : terms_) {
    const Axis a = t.product.axis_at(site);
    if (a == Axis::X || a == Axis::Y) return true;
  }
  return false;
}

std::string HamiltonianTerms::to_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& t : terms_) {
    for (std::size_t k = 0; k < t.product.weight(); ++k) {
      os << (k ? "," : "") << t.product.factor(k).site;
    }
    os << ' ';
    for (std::size_t k = 0; k < t.product.weight(); ++k) os << axis_char(t.product.factor(k).axis);
    os << ' ' << t.coefficient << '\n';
  }
  return os.str();
}

std::uint64_t HamiltonianTerms::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(num_sites_);
  for (const auto& t : terms_) {
    mix(t.product.weight());
    for (const auto& f : t.product) mix((std::uint64_t{f.site} << 2) | static_cast<unsigned>(f.axis));
    std::uint64_t bits;
    std::memcpy(&bits, &t.coefficient, sizeof bits);
    mix(bits);
  }
  return h;
}

bool operator==(const HamiltonianTerms& a, const HamiltonianTerms& b) {
  if (a.num_sites_ != b.num_sites_ || a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (!(a.terms_[i].product == b.terms_[i].product) ||
        a.terms_[i].coefficient != b.terms_[i].coefficient) {
      return false;
    }
  }
  return true;
}

}  // namespace nvlayer
