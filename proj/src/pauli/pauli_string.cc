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

#include "nvlayer/pauli/pauli_string.h"

#include <algorithm>
#include <sstream>
#include <vector>

#include "nvlayer/errors.h"

namespace nvlayer {

char axis_char(Axis a) {
  switch (a) {
    case Axis::X:
      return 'X';
    case Axis::Y:
      return 'Y';
    case Axis::Z:
      return 'Z';
    default:
      return 'I';
  }
}

PauliString::PauliString(std::initializer_list<PauliFactor> factors) {
  if (factors.size() > kMaxWeight) throw DomainError("Pauli string exceeds maximum weight");
  for (const auto& f : factors) {
    if (f.axis == Axis::I) continue;
    factors_[weight_++] = f;
  }
  std::sort(factors_.begin(), factors_.begin() + weight_,
            [](const PauliFactor& a, const PauliFactor& b) { return a.site < b.site; });
  for (std::size_t k = 1; k < weight_; ++k) {
    if (factors_[k].site == factors_[k - 1].site) {
      throw DomainError("Pauli string lists site " + std::to_string(factors_[k].site) + " twice");
    }
  }
}

PauliString PauliString::single(std::uint32_t site, Axis axis) { return PauliString{{site, axis}}; }

PauliString PauliString::pair(std::uint32_t s0, Axis a0, std::uint32_t s1, Axis a1) {
  return PauliString{{s0, a0}, {s1, a1}};
}

PauliString PauliString::parse(const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  PauliString out;
  std::vector<PauliFactor> fs;
  while (is >> tok) {
    if (tok == "I") continue;
    if (tok.size() < 2) throw DomainError("bad Pauli token '" + tok + "'");
    Axis a;
    switch (tok[0]) {
      case 'X':
        a = Axis::X;
        break;
      case 'Y':
        a = Axis::Y;
        break;
      case 'Z':
        a = Axis::Z;
        break;
      default:
        throw DomainError("bad Pauli token '" + tok + "'");
    }
    std::size_t pos = 0;
    unsigned long site = 0;
    try {
      site = std::stoul(tok.substr(1), &pos);
    } catch (const std::exception&) {
      throw DomainError("bad Pauli token '" + tok + "'");
    }
    if (pos != tok.size() - 1) throw DomainError("bad Pauli token '" + tok + "'");
    fs.push_back(PauliFactor{static_cast<std::uint32_t>(site), a});
  }
  if (fs.size() > kMaxWeight) throw DomainError("Pauli string exceeds maximum weight");
  std::sort(fs.begin(), fs.end(),
            [](const PauliFactor& a, const PauliFactor& b) { return a.site < b.site; });
  for (std::size_t k = 0; k < fs.size(); ++k) {
    if (k && fs[k].site == fs[k - 1].site) {
      throw DomainError("Pauli string lists site " + std::to_string(fs[k].site) + " twice");
    }
    out.push_back_unchecked(fs[k].site, fs[k].axis);
  }
  return out;
}

Axis PauliString::axis_at(std::uint32_t site) const {
  for (std::size_t k = 0; k < weight_; ++k) {
    if (factors_[k].site == site) return factors_[k].axis;
    if (factors_[k].site > site) break;
  }
  return Axis::I;
}

PauliString PauliString::with_axis(std::uint32_t site, Axis axis) const {
  PauliString out;
  bool placed = false;
  for (std::size_t k = 0; k < weight_; ++k) {
    const auto& f = factors_[k];
    if (!placed && f.site >= site) {
      placed = true;
      if (axis != Axis::I) out.push_back_unchecked(site, axis);
      if (f.site == site) continue;
    }
    out.push_back_unchecked(f.site, f.axis);
  }
  if (!placed && axis != Axis::I) {
    if (out.weight_ >= kMaxWeight) throw DomainError("Pauli string exceeds maximum weight");
    out.push_back_unchecked(site, axis);
  }
  return out;
}

std::string PauliString::str() const {
  if (weight_ == 0) return "I";
  std::string s;
  for (std::size_t k = 0; k < weight_; ++k) {
    if (k) s += ' ';
    s += axis_char(factors_[k].axis);
    s += std::to_string(factors_[k].site);
  }
  return s;
}

bool operator==(const PauliString& a, const PauliString& b) {
  if (a.weight_ != b.weight_) return false;
  for (std::size_t k = 0; k < a.weight_; ++k) {
    if (a.factors_[k].site != b.factors_[k].site || a.factors_[k].axis != b.factors_[k].axis) {
      return false;
    }
  }
  return true;
}

bool operator<(const PauliString& a, const PauliString& b) {
  if (a.weight_ != b.weight_) return a.weight_ < b.weight_;
  for (std::size_t k = 0; k < a.weight_; ++k) {
    if (a.factors_[k].site != b.factors_[k].site) return a.factors_[k].site < b.factors_[k].site;
    if (a.factors_[k].axis != b.factors_[k].axis) return a.factors_[k].axis < b.factors_[k].axis;
  }
  return false;
}

PauliProduct multiply(const PauliString& a, const PauliString& b) {
  PauliProduct p;
  std::size_t i = 0, j = 0;
  const auto emit = [&](std::uint32_t site, Axis ax) {
    if (p.result.weight() >= PauliString::kMaxWeight) {
      throw DomainError("Pauli product exceeds maximum weight");
    }
    p.result.push_back_unchecked(site, ax);
  };
  while (i < a.weight() || j < b.weight()) {
    if (j == b.weight() || (i < a.weight() && a.factor(i).site < b.factor(j).site)) {
      emit(a.factor(i).site, a.factor(i).axis);
      ++i;
    } else if (i == a.weight() || b.factor(j).site < a.factor(i).site) {
      emit(b.factor(j).site, b.factor(j).axis);
      ++j;
    } else {
      const auto [ph, c] = multiply_axis(a.factor(i).axis, b.factor(j).axis);
      p.phase = (p.phase + ph) & 3;
      if (c != Axis::I) emit(a.factor(i).site, c);
      ++i;
      ++j;
    }
  }
  return p;
}

bool commutes(const PauliString& a, const PauliString& b) {
  int clashes = 0;
  std::size_t i = 0, j = 0;
  while (i < a.weight() && j < b.weight()) {
    if (a.factor(i).site < b.factor(j).site) {
      ++i;
    } else if (b.factor(j).site < a.factor(i).site) {
      ++j;
    } else {
      clashes += a.factor(i).axis != b.factor(j).axis;
      ++i;
      ++j;
    }
  }
  return (clashes & 1) == 0;
}

}  // namespace nvlayer
