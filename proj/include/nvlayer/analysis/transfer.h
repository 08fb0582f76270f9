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

namespace nvlayer {

/// d(v) = a (v - v0)^(-b) + d0 with v in ns^2 and d in nm, plus one-sigma constant errors.
struct TransferFunction {
  double a = 2.222;
  double b = 0.221;
  double v0 = 14.87;
  double d0 = 0.0950;
  double sd_a = 0.017;
  double sd_b = 0.005;
  double sd_v0 = 0.25;
  double sd_d0 = 0.0127;
  // Variances at or below this (the 1.5 nm cut-off) are out of the estimation range.
  double cutoff_variance = 22.82;

  /// Throws DomainError for v <= v0.
  double eval(double v) const;
  /// dd/dv.
  double derivative(double v) const;
};

struct DistanceEstimate {
  double distance_nm = 0.0;
  double sd_nm = 0.0;
  bool in_range = false;
};

/// First-order error propagation from sd_v and, when requested, from the constants' errors.
/// Out-of-range variances still get a distance but in_range = false.
DistanceEstimate distance_from_variance(double v, double sd_v, const TransferFunction& tf = {},
                                        bool include_constant_errors = true);

}  // namespace nvlayer
