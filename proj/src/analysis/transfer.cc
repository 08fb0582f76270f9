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

#include "nvlayer/analysis/transfer.h"

#include <cmath>
#include <string>

#include "nvlayer/errors.h"

namespace nvlayer {

double TransferFunction::eval(double v) const {
  if (!(v > v0)) throw DomainError("variance " + std::to_string(v) + " ns^2 is not above v0");
  return a * std::pow(v - v0, -b) + d0;
}

double TransferFunction::derivative(double v) const {
  if (!(v > v0)) throw DomainError("variance " + std::to_string(v) + " ns^2 is not above v0");
  return -a * b * std::pow(v - v0, -b - 1.0);
}

DistanceEstimate distance_from_variance(double v, double sd_v, const TransferFunction& tf,
                                        bool include_constant_errors) {
  DistanceEstimate e;
  e.distance_nm = tf.eval(v);
  e.in_range = v > tf.cutoff_variance;
  const double x = v - tf.v0;
  const double p = std::pow(x, -tf.b);
  const double dv = tf.derivative(v);
  double var = dv * dv * sd_v * sd_v;
  if (include_constant_errors) {
    const double dd_da = p;
    const double dd_db = -tf.a * p * std::log(x);
    const double dd_dv0 = -dv;
    var += dd_da * dd_da * tf.sd_a * tf.sd_a + dd_db * dd_db * tf.sd_b * tf.sd_b +
           dd_dv0 * dd_dv0 * tf.sd_v0 * tf.sd_v0 + tf.sd_d0 * tf.sd_d0;
  }
  e.sd_nm = std::sqrt(var);
  return e;
}

}  // namespace nvlayer
