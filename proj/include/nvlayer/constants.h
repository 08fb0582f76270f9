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

#include <numbers>

namespace nvlayer::constants {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018.
inline constexpr double kMu0Over4Pi = 1.00000000055e-7;  // T m / A
inline constexpr double kHbar = 1.054571817e-34;         // J s

inline constexpr double kGamma13C = kTwoPi * 10.7084e6;        // rad s^-1 T^-1
inline constexpr double kGammaElectron = -kTwoPi * 28.024e9;   // rad s^-1 T^-1

inline constexpr double kDiamondLatticeConstantNm = 0.357;
inline constexpr double kCarbonNearestNeighborNm = 0.154;

// Angle between the [100] growth normal and the [111] NV axis.
inline constexpr double kLayerTiltDeg = 54.7;
inline constexpr double kLayerTiltRad = kLayerTiltDeg * kPi / 180.0;

inline constexpr double kNanometer = 1e-9;

inline constexpr double hz_to_rad(double hz) { return kTwoPi * hz; }
inline constexpr double rad_to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }

}  // namespace nvlayer::constants
