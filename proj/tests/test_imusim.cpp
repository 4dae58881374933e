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

#include "doctest.h"
#include "jrtok/error.hpp"
#include "jrtok/imusim.hpp"
#include "test_util.hpp"

using namespace jrtok;
using namespace jrtok::imu;
using motion::PoseFrame;
using motion::RawPoseTrack;
using motion::Skeleton;

namespace {

RawPoseTrack identity_track(std::size_t n, double fps = 60.0) {
  RawPoseTrack t;
  t.fps = fps;
  PoseFrame f;
  f.root_translation = Vec3(0.0, 0.93, 0.0);
  f.local_rotations.assign(motion::kLocalJoints, Mat3::Identity());
  t.frames.assign(n, f);
  return t;
}

SensorPlacement unmounted() {
  SensorPlacement p = SensorPlacement::standard();
  for (auto& s : p.sensors) {
    s.mount = Mat3::Identity();
    s.lever = Vec3::Zero();
  }
  return p;
}

InertiaSequence blank(std::size_t n) {
  InertiaSequence s;
  s.frames.resize(n);
  return s;
}

bool sensor_equal(const InertiaFrame& a, const InertiaFrame& b, int s) {
  return a.q[s] == b.q[s] && a.a[s] == b.a[s] && a.omega[s] == b.omega[s];
}

}  // namespace

TEST_CASE("standard placement is valid and frame width is 72") {
  CHECK_NOTHROW(SensorPlacement::standard().validate(Skeleton::standard()));
  SensorPlacement dup = SensorPlacement::standard();
  dup.sensors[1].joint = dup.sensors[0].joint;
  CHECK_THROWS_AS(dup.validate(Skeleton::standard()), Error);

  Rng rng(3);
  const auto data = testutil::random_vector(rng, 4 * layout::kWidth);
  const InertiaSequence seq = InertiaSequence::unflatten(data, 60.0);
  CHECK(seq.size() == 4);
  CHECK(seq.flatten() == data);
}

TEST_CASE("stationary pose: zero acceleration and angular velocity") {
  CHECK_THROWS_WITH_AS(synthesize_imu(identity_track(4), Skeleton::standard(), SensorPlacement::standard()),
                       doctest::Contains("TooShort"), Error);
  const InertiaSequence seq = synthesize_imu(identity_track(20), Skeleton::standard(), SensorPlacement::standard());
  for (const InertiaFrame& f : seq.frames) {
    for (int s = 0; s < kSensorCount; ++s) {
      CHECK(f.a[s].norm() < 1e-9);
      CHECK(f.omega[s].norm() < 1e-12);
      CHECK(f.q[s] == seq.frames[0].q[s]);
    }
  }
}

TEST_CASE("sinusoidal sensor: free acceleration amplitude") {
  RawPoseTrack track = identity_track(240);
  const double amp = 0.1, freq = 1.0;
  for (std::size_t t = 0; t < track.size(); ++t)
    track.frames[t].root_translation.x() = amp * std::sin(2.0 * std::numbers::pi * freq * t / 60.0);
  const InertiaSequence seq = synthesize_imu(track, Skeleton::standard(), SensorPlacement::standard());
  const double expect = amp * std::pow(2.0 * std::numbers::pi * freq, 2);
  for (int s = 0; s < kSensorCount; ++s) {
    double peak = 0.0;
    for (const InertiaFrame& f : seq.frames) peak = std::max(peak, f.a[s].norm());
    CHECK(std::abs(peak - expect) / expect < 0.02);
  }
}

TEST_CASE("constant-rate rotation: body-frame angular velocity") {
  RawPoseTrack track = identity_track(60);
  for (std::size_t t = 0; t < track.size(); ++t)
    track.frames[t].root_rotation = geom::rotation_about(Vec3::UnitZ(), t / 60.0);
  const InertiaSequence seq = synthesize_imu(track, Skeleton::standard(), unmounted());
  for (const InertiaFrame& f : seq.frames) CHECK((f.omega[0] - Vec3(0, 0, 1)).norm() < 1e-6);

  // a tilted mount sees the same rotation in its own axes
  SensorPlacement tilted = unmounted();
  const Mat3 m = geom::rotation_about(Vec3(1, 1, 0), 0.7);
  tilted.sensors[0].mount = m;
  const InertiaSequence seq2 = synthesize_imu(track, Skeleton::standard(), tilted);
  for (const InertiaFrame& f : seq2.frames) CHECK((f.omega[0] - m.transpose() * Vec3(0, 0, 1)).norm() < 1e-6);
}

TEST_CASE("synthesis is translation equivariant") {
  const RawPoseTrack track = motion::generate_synthetic_motion(5, 1.0, 60.0, motion::Style::kWalk);
  const InertiaSequence a = synthesize_imu(track, Skeleton::standard(), SensorPlacement::standard());
  const InertiaSequence b =
      synthesize_imu(motion::translated(track, Vec3(4, 0, 1)), Skeleton::standard(), SensorPlacement::standard());
  for (std::size_t t = 0; t < a.size(); ++t)
    for (int s = 0; s < kSensorCount; ++s) {
      CHECK(a.frames[t].q[s] == b.frames[t].q[s]);
      CHECK((a.frames[t].a[s] - b.frames[t].a[s]).norm() < 1e-8);
      CHECK(a.frames[t].omega[s] == b.frames[t].omega[s]);
    }
}

TEST_CASE("drift: zero sigma is the identity, determinism") {
  const RawPoseTrack track = motion::generate_synthetic_motion(5, 1.0, 60.0, motion::Style::kSquat);
  const InertiaSequence seq = synthesize_imu(track, Skeleton::standard(), SensorPlacement::standard());
  NoiseConfig none;
  none.seed = 9;
  CHECK(apply_drift(seq, none).flatten() == seq.flatten());
  const NoiseConfig cfg = NoiseConfig::default_drift(9);
  CHECK(apply_drift(seq, cfg).flatten() == apply_drift(seq, cfg).flatten());
  CHECK(apply_drift(seq, cfg).flatten() != seq.flatten());
}

TEST_CASE("drift: accumulated acceleration offset variance grows linearly") {
  const std::size_t t = 20;
  const double sigma = 0.01;
  NoiseConfig cfg;
  cfg.drift.acceleration = sigma;
  const InertiaSequence zero = blank(t + 1);
  std::vector<double> offsets;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    cfg.seed = seed;
    offsets.push_back(apply_drift(zero, cfg).frames[t].a[2].x());
  }
  const double var = std::pow(testutil::sample_std(offsets), 2);
  CHECK(std::abs(var - t * sigma * sigma) / (t * sigma * sigma) < 0.05);
}

TEST_CASE("drift: one-step orientation error follows the chi-3 mean") {
  const double sigma = 0.002;
  NoiseConfig cfg;
  cfg.drift.orientation = sigma;
  const InertiaSequence zero = blank(2);
  double sum = 0.0;
  const int trials = 20000;
  for (int seed = 0; seed < trials; ++seed) {
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto out = apply_drift(zero, cfg);
    sum += geom::geodesic_distance(Mat3::Identity(), geom::rot6d_to_matrix(out.frames[1].q[4]));
  }
  const double expect = sigma * std::sqrt(8.0 / std::numbers::pi);
  CHECK(std::abs(sum / trials - expect) / expect < 0.02);
}

TEST_CASE("corruption: locality, identity, statistics, commutation") {
  const RawPoseTrack track = motion::generate_synthetic_motion(2, 2.0, 60.0, motion::Style::kArmRaise);
  const InertiaSequence seq = synthesize_imu(track, Skeleton::standard(), SensorPlacement::standard());

  NoiseConfig cfg;
  cfg.gaussian = {0.1, 1.0, 0.5};
  cfg.seed = 4;
  CHECK(apply_corruption(seq, cfg).flatten() == seq.flatten());

  cfg.corrupted_sensors = {2};
  const InertiaSequence out = apply_corruption(seq, cfg);
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (int s = 0; s < kSensorCount; ++s) CHECK(sensor_equal(out.frames[t], seq.frames[t], s) == (s != 2));

  cfg.corrupted_sensors = {7};
  CHECK_THROWS_AS(apply_corruption(seq, cfg), Error);

  NoiseConfig a_only;
  a_only.gaussian.acceleration = 1.0;
  a_only.corrupted_sensors = {3};
  const InertiaSequence zero = blank(100000);
  const InertiaSequence noisy = apply_corruption(zero, a_only);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> d;
    d.reserve(zero.size());
    for (const InertiaFrame& f : noisy.frames) d.push_back(f.a[3][k]);
    const double sd = testutil::sample_std(d);
    CHECK(sd >= 0.97);
    CHECK(sd <= 1.03);
  }

  NoiseConfig first = cfg, second = cfg;
  first.corrupted_sensors = {0, 4};
  first.seed = 1;
  second.corrupted_sensors = {1, 5};
  second.seed = 2;
  second.dropout[5] = true;
  CHECK(apply_corruption(apply_corruption(seq, first), second).flatten() ==
        apply_corruption(apply_corruption(seq, second), first).flatten());
}

TEST_CASE("dropout holds the last valid reading") {
  const RawPoseTrack track = motion::generate_synthetic_motion(2, 2.0, 60.0, motion::Style::kArmRaise);
  const InertiaSequence seq = synthesize_imu(track, Skeleton::standard(), SensorPlacement::standard());
  NoiseConfig cfg;
  cfg.corrupted_sensors = {1};
  cfg.dropout[1] = true;
  const InertiaSequence out = apply_corruption(seq, cfg);
  const std::size_t drop_at = seq.size() / 2;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const InertiaFrame& expect = seq.frames[t < drop_at ? t : drop_at - 1];
    CHECK(sensor_equal(out.frames[t], expect, 1));
  }
}

TEST_CASE("normalization statistics") {
  CHECK_THROWS_WITH_AS(fit_norm_stats({}), doctest::Contains("EmptyCorpus"), Error);
  const std::vector<InertiaSequence> zeros = {blank(10)};
  const NormStats z = fit_norm_stats(zeros);
  for (int d = 0; d < layout::kAccelDims; ++d) {
    CHECK(z.mean[d] == 0.0);
    CHECK(z.stddev[d] == kMinStd);
  }

  Rng rng(12);
  InertiaSequence gauss = blank(100000);
  for (InertiaFrame& f : gauss.frames) f.a[0].x() = rng.normal(3.0, 2.0);
  const std::vector<InertiaSequence> corpus = {gauss};
  const NormStats st = fit_norm_stats(corpus);
  CHECK(std::abs(st.mean[0] - 3.0) / 3.0 < 0.02);
  CHECK(std::abs(st.stddev[0] - 2.0) / 2.0 < 0.02);

  const RawPoseTrack track = motion::generate_synthetic_motion(2, 2.0, 60.0, motion::Style::kWalk);
  const InertiaSequence seq = synthesize_imu(track, Skeleton::standard(), SensorPlacement::standard());
  const std::vector<InertiaSequence> one = {seq};
  const std::vector<InertiaSequence> twice = {seq, seq};
  const NormStats s1 = fit_norm_stats(one);
  const NormStats s2 = fit_norm_stats(twice);
  for (int d = 0; d < layout::kAccelDims; ++d) {
    CHECK(s1.mean[d] == doctest::Approx(s2.mean[d]).epsilon(1e-12));
    CHECK(s1.stddev[d] == doctest::Approx(s2.stddev[d]).epsilon(1e-12));
  }

  const InertiaSequence normed = normalize_acceleration(seq, s1);
  const std::vector<InertiaSequence> normed_corpus = {normed};
  const NormStats after = fit_norm_stats(normed_corpus);
  for (int d = 0; d < layout::kAccelDims; ++d) {
    CHECK(std::abs(after.mean[d]) < 1e-6);
    CHECK(after.stddev[d] >= 0.999);
    CHECK(after.stddev[d] <= 1.001);
  }
  const InertiaSequence back = denormalize_acceleration(normed, s1);
  const auto x = seq.flatten(), y = back.flatten();
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) < 1e-9);
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (int s = 0; s < kSensorCount; ++s) {
      CHECK(normed.frames[t].q[s] == seq.frames[t].q[s]);
      CHECK(normed.frames[t].omega[s] == seq.frames[t].omega[s]);
    }

  NormStats unit;
  unit.stddev.fill(1.0);
  CHECK(normalize_acceleration(seq, unit).flatten() == seq.flatten());
}
