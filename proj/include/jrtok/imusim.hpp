// Copyright 2026 The jrtok Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "jrtok/geom.hpp"
#include "jrtok/motion.hpp"

namespace jrtok::imu {

using geom::Mat3;
using geom::Rot6D;
using geom::Vec3;

inline constexpr int kSensorCount = 6;

namespace layout {
inline constexpr int kOrientation = 0;                    // q, 6 x 6D
inline constexpr int kAccel = 6 * kSensorCount;           // a, 6 x 3
inline constexpr int kGyro = kAccel + 3 * kSensorCount;   // omega, 6 x 3
inline constexpr int kWidth = kGyro + 3 * kSensorCount;
inline constexpr int kAccelDims = 3 * kSensorCount;
static_assert(kWidth == 72);
}  // namespace layout

struct SensorMount {
  int joint = 0;
  Mat3 mount = Mat3::Identity();  // sensor frame relative to the bone frame
  Vec3 lever = Vec3::Zero();      // sensor origin in the bone frame (m)
};

struct SensorPlacement {
  std::array<SensorMount, kSensorCount> sensors;

  void validate(const motion::Skeleton& skel) const;

  /// pelvis, head, left wrist, right wrist, left knee, right knee
  static SensorPlacement standard();
};

struct InertiaFrame {
  std::array<Rot6D, kSensorCount> q{};
  std::array<Vec3, kSensorCount> a{};
  std::array<Vec3, kSensorCount> omega{};

  void flatten_into(std::span<double> out) const;
  static InertiaFrame unflatten(std::span<const double> in);
};

struct InertiaSequence {
  double fps = 60.0;
  std::vector<InertiaFrame> frames;

  std::size_t size() const { return frames.size(); }
  std::vector<double> flatten() const;
  static InertiaSequence unflatten(std::span<const double> data, double fps);
};

struct ChannelSigma {
  double orientation = 0.0;   // rad
  double acceleration = 0.0;  // m/s^2
  double gyro = 0.0;          // rad/s
};

struct NoiseConfig {
  /// Random-walk increments per step (per sqrt(step) for the accumulated value).
  ChannelSigma drift;
  /// Per-frame i.i.d. corruption on the listed sensors.
  ChannelSigma gaussian;
  std::vector<int> corrupted_sensors;
  /// A dropped sensor holds its last valid reading (plus noise) from
  /// frame floor(dropout_from * length) on.
  std::array<bool, kSensorCount> dropout{};
  double dropout_from = 0.5;
  std::uint64_t seed = 0;

  /// Default random-walk drift magnitudes.
  static NoiseConfig default_drift(std::uint64_t seed);
};

/// Per-dimension statistics of the 18 acceleration channels.
struct NormStats {
  std::array<double, layout::kAccelDims> mean{};
  std::array<double, layout::kAccelDims> stddev{};

  bool operator==(const NormStats&) const = default;
};

inline constexpr double kMinStd = 1e-6;

/// Virtual sensors on a pose track. Free acceleration is the second time
/// difference of the sensor position in world axes; the simulated positions
/// carry no gravity term, so `gravity` only records the convention.
InertiaSequence synthesize_imu(const motion::RawPoseTrack& track, const motion::Skeleton& skel,
                               const SensorPlacement& placement,
                               const Vec3& gravity = Vec3(0.0, -9.81, 0.0));

InertiaSequence apply_drift(const InertiaSequence& seq, const NoiseConfig& cfg);
InertiaSequence apply_corruption(const InertiaSequence& seq, const NoiseConfig& cfg);

NormStats fit_norm_stats(std::span<const InertiaSequence> corpus);
InertiaSequence normalize_acceleration(const InertiaSequence& seq, const NormStats& stats);
InertiaSequence denormalize_acceleration(const InertiaSequence& seq, const NormStats& stats);

}  // namespace jrtok::imu
