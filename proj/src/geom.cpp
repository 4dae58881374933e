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

#include "jrtok/geom.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "jrtok/error.hpp"

namespace jrtok::geom {

namespace {

constexpr double kMinColumnNorm = 1e-8;
// Below this cosine the axis is recovered from the symmetric part.
constexpr double kNearPiCos = -0.99;

Vec3 vee_antisymmetric(const Mat3& m) {
  return Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)) * 0.5;
}

bool decode_columns(const Rot6D& r, Mat3& out) {
  const Vec3 a1(r.values[0], r.values[1], r.values[2]);
  const Vec3 a2(r.values[3], r.values[4], r.values[5]);
  const double n1 = a1.norm();
  const double n2 = a2.norm();
  if (!(n1 > kMinColumnNorm) || !(n2 > kMinColumnNorm)) return false;
  const Vec3 b1 = a1 / n1;
  const Vec3 u = a2 - b1.dot(a2) * b1;
  const double nu = u.norm();
  if (!(nu > kMinColumnNorm * n2)) return false;
  const Vec3 b2 = u / nu;
  out.col(0) = b1;
  out.col(1) = b2;
  out.col(2) = b1.cross(b2);
  return true;
}

}  // namespace

Mat3 rot6d_to_matrix(const Rot6D& r) {
  Mat3 out;
  if (!decode_columns(r, out)) {
    throw Error(ErrorCode::kDegenerateInput, "6D rotation columns are near-zero or parallel");
  }
  return out;
}

Mat3 rot6d_to_matrix_or_identity(const Rot6D& r) {
  Mat3 out;
  if (!decode_columns(r, out)) return Mat3::Identity();
  return out;
}

Rot6D matrix_to_rot6d(const Mat3& rotation) {
  Rot6D r;
  for (int i = 0; i < 3; ++i) {
    r.values[i] = rotation(i, 0);
    r.values[3 + i] = rotation(i, 1);
  }
  return r;
}

Vec3 log_so3(const Mat3& rotation) {
  const double c = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  const Vec3 w = vee_antisymmetric(rotation);  // sin(theta) * axis
  const double s = w.norm();
  const double theta = std::atan2(s, c);
  if (theta < kSmallAngle) return w;
  if (c > kNearPiCos) return w * (theta / s);

  // Near pi: (R + R^T) / 2 = c I + (1 - c) n n^T.
  const Mat3 sym = (rotation + rotation.transpose()) * 0.5;
  const double one_minus_c = 1.0 - c;
  int pivot = 0;
  for (int i = 1; i < 3; ++i) {
    if (sym(i, i) > sym(pivot, pivot)) pivot = i;
  }
  Vec3 axis;
  axis[pivot] = std::sqrt(std::max(0.0, (sym(pivot, pivot) - c) / one_minus_c));
  for (int j = 0; j < 3; ++j) {
    if (j != pivot) axis[j] = sym(pivot, j) / (one_minus_c * axis[pivot]);
  }
  axis.normalize();
  if (axis.dot(w) < 0.0) axis = -axis;
  return axis * theta;
}

Mat3 exp_so3(const Vec3& rotation_vector) {
  const double theta = rotation_vector.norm();
  Mat3 k;
  k << 0.0, -rotation_vector.z(), rotation_vector.y(),
       rotation_vector.z(), 0.0, -rotation_vector.x(),
       -rotation_vector.y(), rotation_vector.x(), 0.0;
  if (theta < kSmallAngle) return Mat3::Identity() + k + 0.5 * k * k;
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 angular_velocity(const Mat3& prev, const Mat3& next, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  return log_so3(prev.transpose() * next) / dt;
}

Mat3 slerp(const Mat3& from, const Mat3& to, double t) {
  return from * exp_so3(t * log_so3(from.transpose() * to));
}

double geodesic_distance(const Mat3& a, const Mat3& b) {
  return log_so3(a.transpose() * b).norm();
}

Mat3 rotation_about(const Vec3& axis, double angle) {
  return exp_so3(axis.normalized() * angle);
}

}  // namespace jrtok::geom
