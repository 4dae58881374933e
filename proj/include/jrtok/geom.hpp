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

#include <Eigen/Core>

namespace jrtok::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Continuous 6D rotation: the first two columns of a rotation matrix,
/// stored column-major as (c0.x, c0.y, c0.z, c1.x, c1.y, c1.z).
struct Rot6D {
  std::array<double, 6> values{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  bool operator==(const Rot6D&) const = default;
};

/// Gram-Schmidt decode. Throws DegenerateInput when either column has
/// norm <= 1e-8 or the columns are parallel.
Mat3 rot6d_to_matrix(const Rot6D& r);

/// Like rot6d_to_matrix but returns identity for degenerate input. Used on
/// network outputs where a rare collapsed column must not abort evaluation.
Mat3 rot6d_to_matrix_or_identity(const Rot6D& r);

Rot6D matrix_to_rot6d(const Mat3& rotation);

/// Rotation vector (axis * angle) of a proper rotation. Uses a first-order
/// series below kSmallAngle and an eigen-axis branch near pi.
Vec3 log_so3(const Mat3& rotation);

/// Rodrigues formula; inverse of log_so3.
Mat3 exp_so3(const Vec3& rotation_vector);

/// Body-frame angular velocity carrying prev to next in dt seconds:
/// log(prev^T next) / dt. Throws InvalidArgument for dt <= 0.
Vec3 angular_velocity(const Mat3& prev, const Mat3& next, double dt);

/// Geodesic interpolation prev * exp(t * log(prev^T next)).
Mat3 slerp(const Mat3& from, const Mat3& to, double t);

/// Angle of the relative rotation between a and b, in radians.
double geodesic_distance(const Mat3& a, const Mat3& b);

Mat3 rotation_about(const Vec3& axis, double angle);

inline constexpr double kSmallAngle = 1e-7;

}  // namespace jrtok::geom
