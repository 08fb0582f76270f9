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
#include <optional>
#include <unordered_map>
#include <vector>

#include "nvlayer/geometry/layout.h"
#include "nvlayer/pauli/pauli_string.h"

namespace nvlayer {

struct TruncationRule {
  // Strings with an NV factor may carry up to this many nuclear factors.
  std::size_t max_nuclear_weight = 2;
  // Extension: purely nuclear weight-3 strings whose sites lie pairwise within this radius.
  // Zero disables the extension.
  double nuclear_triple_radius_nm = 0.0;
};

/// Admitted Pauli strings over sites 0 (NV) .. n (nuclei), in a fixed order:
/// identity, weight one, nuclear pairs, NV-nuclear pairs, NV-nuclear-nuclear triples,
/// then optional nuclear triples.
class TruncatedBasis {
 public:
  static constexpr std::size_t kDefaultBudget = std::size_t{1} << 27;

  /// Throws CapacityError when the size exceeds `max_size`. `layout` is only consulted by the
  /// nuclear-triple extension.
  static TruncatedBasis enumerate(std::size_t n_nuclei, const TruncationRule& rule = {},
                                  const SpinLayout* layout = nullptr,
                                  std::size_t max_size = kDefaultBudget);

  /// 1 + 3(n+1) + 9 C(n,2) + 9n + 27 C(n,2) for the default rule.
  static std::size_t closed_form_size(std::size_t n_nuclei);

  std::size_t size() const { return strings_.size(); }
  std::size_t num_nuclei() const { return n_; }
  std::size_t num_sites() const { return n_ + 1; }
  const PauliString& string(std::size_t i) const { return strings_[i]; }
  const std::vector<PauliString>& strings() const { return strings_; }

  /// Index of an admitted string, or nullopt.
  std::optional<std::uint32_t> find(const PauliString& p) const;
  /// Index of an admitted string; throws QueryError otherwise.
  std::uint32_t index(const PauliString& p) const;
  bool admits(const PauliString& p) const { return find(p).has_value(); }

  std::uint64_t hash() const { return hash_; }
  const TruncationRule& rule() const { return rule_; }

 private:
  std::size_t pair_index(std::uint32_t i, std::uint32_t j) const;  // nuclear sites 1 <= i < j

  std::size_t n_ = 0;
  TruncationRule rule_;
  std::vector<PauliString> strings_;
  std::size_t off_w1_ = 1, off_nn_ = 0, off_vn_ = 0, off_vnn_ = 0, off_extra_ = 0;
  std::unordered_map<std::uint64_t, std::uint32_t> extras_;
  std::uint64_t hash_ = 0;
};

}  // namespace nvlayer
