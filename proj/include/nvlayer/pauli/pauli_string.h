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

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>

namespace nvlayer {

enum class Axis : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char axis_char(Axis a);

struct PauliFactor {
  std::uint32_t site = 0;
  Axis axis = Axis::I;
};

/// Tensor product of single-site Pauli matrices, identity on unlisted sites. Factors are
/// kept sorted by site. Storage is inline; weights above kMaxWeight are rejected.
class PauliString {
 public:
  static constexpr std::size_t kMaxWeight = 8;

  PauliString() = default;
  PauliString(std::initializer_list<PauliFactor> factors);

  static PauliString single(std::uint32_t site, Axis axis);
  static PauliString pair(std::uint32_t s0, Axis a0, std::uint32_t s1, Axis a1);
  /// Parses "X0 Z3" style text; "I" is the identity.
  static PauliString parse(const std::string& text);

  std::size_t weight() const { return weight_; }
  bool is_identity() const { return weight_ == 0; }
  const PauliFactor& factor(std::size_t k) const { return factors_[k]; }
  const PauliFactor* begin() const { return factors_.data(); }
  const PauliFactor* end() const { return factors_.data() + weight_; }

  Axis axis_at(std::uint32_t site) const;
  bool acts_on(std::uint32_t site) const { return axis_at(site) != Axis::I; }
  std::uint32_t max_site() const { return weight_ ? factors_[weight_ - 1].site : 0; }

  /// Copy with the factor on `site` replaced (Axis::I removes it).
  PauliString with_axis(std::uint32_t site, Axis axis) const;

  std::string str() const;

  friend bool operator==(const PauliString& a, const PauliString& b);
  friend bool operator<(const PauliString& a, const PauliString& b);

  /// Appends a factor with site strictly greater than the current last site.
  void push_back_unchecked(std::uint32_t site, Axis axis) {
    factors_[weight_++] = PauliFactor{site, axis};
  }

 private:
  std::array<PauliFactor, kMaxWeight> factors_{};
  std::uint8_t weight_ = 0;
};

/// a * b = i^phase * result.
struct PauliProduct {
  int phase = 0;  // power of i, in [0, 4)
  PauliString result;
};

PauliProduct multiply(const PauliString& a, const PauliString& b);

/// True when the strings commute (an even number of sites carry distinct non-identity axes).
bool commutes(const PauliString& a, const PauliString& b);

/// Single-site product: a * b = i^phase * c.
inline std::pair<int, Axis> multiply_axis(Axis a, Axis b) {
  if (a == Axis::I) return {0, b};
  if (b == Axis::I) return {0, a};
  if (a == b) return {0, Axis::I};
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  const Axis c = static_cast<Axis>(6 - ia - ib);
  // Cyclic (X,Y), (Y,Z), (Z,X) give +i.
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {cyclic ? 1 : 3, c};
}

}  // namespace nvlayer
