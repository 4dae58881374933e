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

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "doctest.h"
#include "jrtok/error.hpp"
#include "jrtok/geom.hpp"
#include "jrtok/rng.hpp"
#include "test_util.hpp"

using namespace jrtok;
using namespace jrtok::geom;

TEST_CASE("rot6d decode: identity and scale invariance") {
  CHECK((rot6d_to_matrix(Rot6D{}) - Mat3::Identity()).norm() < 1e-15);
  CHECK((rot6d_to_matrix(Rot6D{{2, 0, 0, 0, 3, 0}}) - Mat3::Identity()).norm() < 1e-15);

  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Rot6D r;
    for (double& v : r.values) v = rng.normal();
    Rot6D scaled = r;
    const double s1 = rng.uniform(0.1, 10.0), s2 = rng.uniform(0.1, 10.0);
    for (int k = 0; k < 3; ++k) scaled.values[k] *= s1;
    for (int k = 3; k < 6; ++k) scaled.values[k] *= s2;
    const Mat3 a = rot6d_to_matrix(r);
    CHECK((a - rot6d_to_matrix(scaled)).norm() < 1e-12);
    CHECK((a * a.transpose() - Mat3::Identity()).norm() < 1e-9);
    CHECK(std::abs(a.determinant() - 1.0) < 1e-9);
  }
}

TEST_CASE("rot6d decode rejects degenerate input") {
  CHECK_THROWS_WITH_AS(rot6d_to_matrix(Rot6D{{0, 0, 0, 0, 1, 0}}), doctest::Contains("DegenerateInput"), Error);
  CHECK_THROWS_AS(rot6d_to_matrix(Rot6D{{1, 0, 0, 2, 0, 0}}), Error);
  CHECK_THROWS_AS(rot6d_to_matrix(Rot6D{{1, 0, 0, 0, 1e-9, 0}}), Error);
  CHECK((rot6d_to_matrix_or_identity(Rot6D{{0, 0, 0, 0, 0, 0}}) - Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("matrix_to_rot6d takes the first two columns") {
  CHECK(matrix_to_rot6d(Mat3::Identity()) == Rot6D{});
  Mat3 rz;
  rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK(matrix_to_rot6d(rz) == Rot6D{{0, 1, 0, -1, 0, 0}});
}

TEST_CASE("rot6d round trip over random quaternions") {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = testutil::random_rotation(rng);
    CHECK((rot6d_to_matrix(matrix_to_rot6d(r)) - r).norm() < 1e-10);
  }
}

TEST_CASE("angular_velocity analytic cases") {
  const Mat3 a = Eigen::AngleAxisd(0.3, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  CHECK(angular_velocity(a, a, 0.01).norm() == 0.0);

  const Mat3 rz = Eigen::AngleAxisd(0.01, Vec3::UnitZ()).toRotationMatrix();
  CHECK((angular_velocity(Mat3::Identity(), rz, 0.01) - Vec3(0, 0, 1)).norm() < 1e-8);

  CHECK_THROWS_AS(angular_velocity(a, a, 0.0), Error);
  CHECK_THROWS_AS(angular_velocity(a, a, -1.0), Error);
}

TEST_CASE("angular_velocity near pi matches the quaternion log") {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    const double angle = std::numbers::pi - 1e-6;
    const Mat3 prev = testutil::random_rotation(rng);
    const Mat3 next = prev * Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    const Vec3 w = angular_velocity(prev, next, 1.0);
    // quaternion oracle: angle-axis from the unit quaternion of prev^T next
    Eigen::Quaterniond q(prev.transpose() * next);
    if (q.w() < 0) q.coeffs() *= -1.0;
    const double qa = 2.0 * std::atan2(q.vec().norm(), q.w());
    const Vec3 oracle = q.vec().normalized() * qa;
    REQUIRE(w.allFinite());
    CHECK(std::abs(w.norm() - angle) < 1e-6);
    CHECK((w - oracle).norm() < 1e-5);
  }
}

TEST_CASE("log/exp are inverse, small-angle branch continuous") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const double angle = i < 100 ? rng.uniform(0.0, 1e-6) : rng.uniform(0.0, 3.1);
    const Vec3 v = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized() * angle;
    CHECK((log_so3(exp_so3(v)) - v).norm() < 1e-9);
  }
}

TEST_CASE("angular_velocity antisymmetry and sub-step composition") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Mat3 a = testutil::random_rotation(rng);
    const Vec3 w = Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.05;
    const Mat3 b = a * exp_so3(w);
    const double dt = 0.02;
    // Swapping arguments negates the rotation vector, expressed in the other
    // endpoint's frame; for small rotations the frames agree.
    CHECK((angular_velocity(a, b, dt) + angular_velocity(b, a, dt)).norm() < 1e-9);

    constexpr int k = 8;
    Vec3 sum = Vec3::Zero();
    for (int s = 0; s < k; ++s) {
      const Mat3 p = slerp(a, b, static_cast<double>(s) / k);
      const Mat3 q = slerp(a, b, static_cast<double>(s + 1) / k);
      sum += angular_velocity(p, q, dt / k) / k;
    }
    CHECK((sum - angular_velocity(a, b, dt)).norm() < 1e-9);
  }
}

TEST_CASE("geodesic distance and rotation_about") {
  const Mat3 r = rotation_about(Vec3(0, 0, 2), 0.7);
  CHECK(std::abs(geodesic_distance(Mat3::Identity(), r) - 0.7) < 1e-12);
  CHECK((slerp(Mat3::Identity(), r, 0.5) - rotation_about(Vec3::UnitZ(), 0.35)).norm() < 1e-12);
}
