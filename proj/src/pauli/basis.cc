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

#include "nvlayer/pauli/basis.h"

#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

constexpr Axis kAxes[3] = {Axis::X, Axis::Y, Axis::Z};

std::size_t choose2(std::size_t n) { return n * (n - 1) / 2; }

unsigned ax(Axis a) { return static_cast<unsigned>(a) - 1; }

std::uint64_t triple_key(const PauliString& p) {
  std::uint64_t k = 0;
  for (const auto& f : p) k = (k << 21) | (std::uint64_t{f.site} << 2) | static_cast<unsigned>(f.axis);
  return k;
}

}  // namespace

std::size_t TruncatedBasis::closed_form_size(std::size_t n) {
  return 1 + 3 * (n + 1) + 9 * choose2(n) + 9 * n + 27 * choose2(n);
}

std::size_t TruncatedBasis::pair_index(std::uint32_t i, std::uint32_t j) const {
  // Row-major over (i, j) with 1 <= i < j <= n.
  const std::size_t a = i - 1;
  const std::size_t b = j - 1;
  return a * (2 * n_ - a - 1) / 2 + (b - a - 1);
}

TruncatedBasis TruncatedBasis::enumerate(std::size_t n, const TruncationRule& rule,
                                         const SpinLayout* layout, std::size_t max_size) {
  if (n < 1) throw ConfigError("basis needs at least one nucleus");
  if (rule.max_nuclear_weight != 2) {
    throw ConfigError("only the two-nuclear-factor truncation is implemented");
  }
  if (n >= (std::size_t{1} << 19)) throw CapacityError("too many sites for the basis", n);
  const std::size_t base = closed_form_size(n);
  if (base > max_size) {
    throw CapacityError("truncated basis of " + std::to_string(base) +
                            " strings exceeds the budget of " + std::to_string(max_size),
                        base);
  }
  TruncatedBasis B;
  B.n_ = n;
  B.rule_ = rule;
  B.strings_.reserve(base);
  B.strings_.emplace_back();
  for (std::uint32_t s = 0; s <= n; ++s) {
    for (Axis a : kAxes) B.strings_.push_back(PauliString::single(s, a));
  }
  B.off_nn_ = B.strings_.size();
  for (std::uint32_t i = 1; i <= n; ++i) {
    for (std::uint32_t j = i + 1; j <= n; ++j) {
      for (Axis a : kAxes) {
        for (Axis b : kAxes) B.strings_.push_back(PauliString::pair(i, a, j, b));
      }
    }
  }
  B.off_vn_ = B.strings_.size();
  for (std::uint32_t j = 1; j <= n; ++j) {
    for (Axis a : kAxes) {
      for (Axis b : kAxes) B.strings_.push_back(PauliString::pair(0, a, j, b));
    }
  }
  B.off_vnn_ = B.strings_.size();
  for (std::uint32_t i = 1; i <= n; ++i) {
    for (std::uint32_t j = i + 1; j <= n; ++j) {
      for (Axis a : kAxes) {
        for (Axis b : kAxes) {
          for (Axis c : kAxes) B.strings_.push_back(PauliString{{0, a}, {i, b}, {j, c}});
        }
      }
    }
  }
  B.off_extra_ = B.strings_.size();
  if (rule.nuclear_triple_radius_nm > 0.0) {
    if (!layout || layout->num_nuclei() != n) {
      throw ConfigError("nuclear-triple extension needs the matching layout");
    }
    const auto& P = layout->nuclear_positions;
    const double r = rule.nuclear_triple_radius_nm;
    const auto near = [&](std::uint32_t a, std::uint32_t b) {
      return (P[a - 1] - P[b - 1]).norm() <= r;
    };
    for (std::uint32_t i = 1; i <= n; ++i) {
      for (std::uint32_t j = i + 1; j <= n; ++j) {
        if (!near(i, j)) continue;
        for (std::uint32_t k = j + 1; k <= n; ++k) {
          if (!near(i, k) || !near(j, k)) continue;
          for (Axis a : kAxes) {
            for (Axis b : kAxes) {
              for (Axis c : kAxes) {
                const PauliString p{{i, a}, {j, b}, {k, c}};
                B.extras_.emplace(triple_key(p), static_cast<std::uint32_t>(B.strings_.size()));
                B.strings_.push_back(p);
              }
            }
          }
        }
      }
    }
    if (B.strings_.size() > max_size) {
      throw CapacityError("truncated basis with nuclear triples exceeds the budget",
                          B.strings_.size());
    }
  }
  if (B.strings_.size() >= (std::size_t{1} << 31)) {
    throw CapacityError("basis too large for 32-bit indices", B.strings_.size());
  }

  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(n);
  mix(B.strings_.size());
  for (const auto& p : B.strings_) {
    mix(p.weight());
    for (const auto& f : p) mix((std::uint64_t{f.site} << 2) | static_cast<unsigned>(f.axis));
  }
  B.hash_ = h;
  return B;
}

std::optional<std::uint32_t> TruncatedBasis::find(const PauliString& p) const {
  const std::size_t w = p.weight();
  if (w == 0) return 0u;
  if (p.max_site() > n_) return std::nullopt;
  const bool nv = p.factor(0).site == 0;
  std::size_t idx;
  if (w == 1) {
    idx = off_w1_ + 3 * p.factor(0).site + ax(p.factor(0).axis);
  } else if (w == 2 && !nv) {
    idx = off_nn_ + 9 * pair_index(p.factor(0).site, p.factor(1).site) + 3 * ax(p.factor(0).axis) +
          ax(p.factor(1).axis);
  } else if (w == 2) {
    idx = off_vn_ + 9 * (p.factor(1).site - 1) + 3 * ax(p.factor(0).axis) + ax(p.factor(1).axis);
  } else if (w == 3 && nv) {
    idx = off_vnn_ + 27 * pair_index(p.factor(1).site, p.factor(2).site) +
          9 * ax(p.factor(0).axis) + 3 * ax(p.factor(1).axis) + ax(p.factor(2).axis);
  } else if (w == 3 && !extras_.empty()) {
    const auto it = extras_.find(triple_key(p));
    if (it == extras_.end()) return std::nullopt;
    return it->second;
  } else {
    return std::nullopt;
  }
  return static_cast<std::uint32_t>(idx);
}

std::uint32_t TruncatedBasis::index(const PauliString& p) const {
  const auto i = find(p);
  if (!i) throw QueryError("observable " + p.str() + " is not in the truncated basis");
  return *i;
}

}  // namespace nvlayer
