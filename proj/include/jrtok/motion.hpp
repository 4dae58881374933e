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
#include <string>
#include <string_view>
#include <vector>

#include "jrtok/geom.hpp"

namespace jrtok::motion {

using geom::Mat3;
using geom::Rot6D;
using geom::Vec3;

inline constexpr int kJointCount = 22;
inline constexpr int kLocalJoints = kJointCount - 1;
inline constexpr int kFootCount = 4;

/// Channel layout of one flattened motion frame.
namespace layout {
inline constexpr int kRoot = 0;                          // r
inline constexpr int kRootVel = 3;                       // r_dot
inline constexpr int kRootRot = 6;                       // Phi (6D)
inline constexpr int kRootAngVel = 12;                   // Phi_dot
inline constexpr int kJointRot = 15;                     // j_r, 21 x 6D
inline constexpr int kJointPos = kJointRot + 6 * kLocalJoints;  // j_p, 21 x 3
inline constexpr int kJointVel = kJointPos + 3 * kLocalJoints;  // j_v, 21 x 3
inline constexpr int kContact = kJointVel + 3 * kLocalJoints;   // p, 4
inline constexpr int kWidth = kContact + kFootCount;
static_assert(kWidth == 271);
}  // namespace layout

/// Kinematic tree. Joint 0 is the root; every other joint hangs off
/// parent[j] < j at rest_offset[j] in the parent's frame.
struct Skeleton {
  std::vector<int> parent;
  std::vector<Vec3> rest_offset;
  std::vector<std::string> names;
  /// left toe, left heel, right toe, right heel
  std::array<int, kFootCount> foot_joints{};

  int joint_count() const { return static_cast<int>(parent.size()); }

  /// Throws InvalidArgument if the tree, offsets, or foot joints are invalid.
  void validate() const;

  /// The fixed 22-joint body used throughout the library (y up, +z forward,
  /// ground plane y = 0, left side at +x).
  static const Skeleton& standard();
};

namespace joints {
inline constexpr int kPelvis = 0;
inline constexpr int kLeftHip = 1;
inline constexpr int kLeftKnee = 2;
inline constexpr int kLeftAnkle = 3;
inline constexpr int kLeftToe = 4;
inline constexpr int kLeftHeel = 5;
inline constexpr int kRightHip = 6;
inline constexpr int kRightKnee = 7;
inline constexpr int kRightAnkle = 8;
inline constexpr int kRightToe = 9;
inline constexpr int kRightHeel = 10;
inline constexpr int kSpine1 = 11;
inline constexpr int kSpine2 = 12;
inline constexpr int kSpine3 = 13;
inline constexpr int kNeck = 14;
inline constexpr int kHead = 15;
inline constexpr int kLeftShoulder = 16;
inline constexpr int kLeftElbow = 17;
inline constexpr int kLeftWrist = 18;
inline constexpr int kRightShoulder = 19;
inline constexpr int kRightElbow = 20;
inline constexpr int kRightWrist = 21;
}  // namespace joints

struct PoseFrame {
  Vec3 root_translation = Vec3::Zero();
  Mat3 root_rotation = Mat3::Identity();
  /// Rotation of joint j relative to its parent is local_rotations[j - 1].
  std::vector<Mat3> local_rotations;
};

struct RawPoseTrack {
  double fps = 60.0;
  std::vector<PoseFrame> frames;

  std::size_t size() const { return frames.size(); }
};

/// World-space result of forward kinematics for one frame.
struct WorldPose {
  std::vector<Vec3> positions;
  std::vector<Mat3> rotations;
};

WorldPose forward_kinematics_full(const Skeleton& skel, const PoseFrame& frame);
std::vector<Vec3> forward_kinematics(const Skeleton& skel, const PoseFrame& frame);

struct MotionFrame {
  Vec3 r = Vec3::Zero();
  Vec3 r_dot = Vec3::Zero();
  Rot6D phi;
  Vec3 phi_dot = Vec3::Zero();
  std::array<Rot6D, kLocalJoints> j_r{};
  std::array<Vec3, kLocalJoints> j_p{};
  std::array<Vec3, kLocalJoints> j_v{};
  std::array<double, kFootCount> contacts{};

  void flatten_into(std::span<double> out) const;
  static MotionFrame unflatten(std::span<const double> in);
};

struct MotionSequence {
  double fps = 60.0;
  std::vector<MotionFrame> frames;

  std::size_t size() const { return frames.size(); }

  /// Row-major frames x 271.
  std::vector<double> flatten() const;
  static MotionSequence unflatten(std::span<const double> data, double fps);
};

inline constexpr double kContactHeight = 0.05;  // m
inline constexpr double kContactSpeed = 0.15;   // m/s

/// foot_positions[t][i] for the four foot joints. Label 1 iff height below
/// kContactHeight and speed (central difference) below kContactSpeed.
std::vector<std::array<double, kFootCount>> derive_contacts(
    std::span<const std::array<Vec3, kFootCount>> foot_positions, double fps);

/// Throws TooShort for fewer than 3 frames.
MotionSequence build_motion_representation(const RawPoseTrack& track, const Skeleton& skel);

/// World joint positions of every frame via FK on (r, Phi, j_r).
std::vector<std::vector<Vec3>> joint_positions(const MotionSequence& seq, const Skeleton& skel);

enum class Style { kWalk, kSquat, kArmRaise, kIdleSway };

std::string_view to_string(Style style);
/// Throws InvalidArgument for unknown names.
Style style_from_string(std::string_view name);

/// Procedural, seed-deterministic motion. Root translation is driven by the
/// planted foot so walking feet do not slide.
RawPoseTrack generate_synthetic_motion(std::uint64_t seed, double duration_s, double fps, Style style);

RawPoseTrack resample(const RawPoseTrack& track, double target_fps);

/// Translate every frame by offset.
RawPoseTrack translated(const RawPoseTrack& track, const Vec3& offset);

}  // namespace jrtok::motion
