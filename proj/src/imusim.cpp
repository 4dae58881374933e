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

#include "jrtok/imusim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "jrtok/error.hpp"
#include "jrtok/rng.hpp"

namespace jrtok::imu {

using geom::exp_so3;
using geom::matrix_to_rot6d;
using geom::rot6d_to_matrix;

void SensorPlacement::validate(const motion::Skeleton& skel) const {
  for (int s = 0; s < kSensorCount; ++s) {
    const SensorMount& m = sensors[s];
    if (m.joint < 0 || m.joint >= skel.joint_count()) {
      throw Error(ErrorCode::kInvalidArgument, "sensor joint out of range");
    }
    for (int o = 0; o < s; ++o) {
      if (sensors[o].joint == m.joint) throw Error(ErrorCode::kInvalidArgument, "sensor joints must be distinct");
    }
    const double ortho = (m.mount * m.mount.transpose() - Mat3::Identity()).norm();
    if (ortho > 1e-9 || std::abs(m.mount.determinant() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "sensor mounting rotation is not proper");
    }
  }
}

SensorPlacement SensorPlacement::standard() {
  using namespace motion::joints;
  const double half_pi = std::numbers::pi / 2.0;
  SensorPlacement p;
  p.sensors[0] = {kPelvis, geom::rotation_about(Vec3::UnitY(), std::numbers::pi), Vec3(0.0, 0.0, -0.1)};
  p.sensors[1] = {kHead, Mat3::Identity(), Vec3(0.0, 0.08, 0.0)};
  p.sensors[2] = {kLeftWrist, geom::rotation_about(Vec3::UnitZ(), half_pi), Vec3(0.0, -0.02, 0.03)};
  p.sensors[3] = {kRightWrist, geom::rotation_about(Vec3::UnitZ(), -half_pi), Vec3(0.0, -0.02, 0.03)};
  p.sensors[4] = {kLeftKnee, Mat3::Identity(), Vec3(0.0, -0.1, 0.06)};
  p.sensors[5] = {kRightKnee, Mat3::Identity(), Vec3(0.0, -0.1, 0.06)};
  return p;
}

void InertiaFrame::flatten_into(std::span<double> out) const {
  for (int s = 0; s < kSensorCount; ++s) {
    std::copy(q[s].values.begin(), q[s].values.end(), out.begin() + layout::kOrientation + 6 * s);
    for (int k = 0; k < 3; ++k) {
      out[layout::kAccel + 3 * s + k] = a[s][k];
      out[layout::kGyro + 3 * s + k] = omega[s][k];
    }
  }
}

InertiaFrame InertiaFrame::unflatten(std::span<const double> in) {
  InertiaFrame f;
  for (int s = 0; s < kSensorCount; ++s) {
    auto first = in.begin() + layout::kOrientation + 6 * s;
    std::copy(first, first + 6, f.q[s].values.begin());
    for (int k = 0; k < 3; ++k) {
      f.a[s][k] = in[layout::kAccel + 3 * s + k];
      f.omega[s][k] = in[layout::kGyro + 3 * s + k];
    }
  }
  return f;
}

std::vector<double> InertiaSequence::flatten() const {
  std::vector<double> out(frames.size() * layout::kWidth);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    frames[t].flatten_into(std::span<double>(out).subspan(t * layout::kWidth, layout::kWidth));
  }
  return out;
}

InertiaSequence InertiaSequence::unflatten(std::span<const double> data, double fps) {
  if (data.size() % layout::kWidth != 0) {
    throw Error(ErrorCode::kShapeMismatch, "inertia data is not a multiple of the frame width");
  }
  InertiaSequence seq;
  seq.fps = fps;
  const std::size_t n = data.size() / layout::kWidth;
  seq.frames.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    seq.frames.push_back(InertiaFrame::unflatten(data.subspan(t * layout::kWidth, layout::kWidth)));
  }
  return seq;
}

NoiseConfig NoiseConfig::default_drift(std::uint64_t seed) {
  NoiseConfig cfg;
  cfg.drift = {0.002, 0.01, 0.001};
  cfg.seed = seed;
  return cfg;
}

InertiaSequence synthesize_imu(const motion::RawPoseTrack& track, const motion::Skeleton& skel,
                               const SensorPlacement& placement, const Vec3& /*gravity*/) {
  const std::size_t n = track.size();
  if (n < 5) throw Error(ErrorCode::kTooShort, "IMU synthesis needs at least 5 frames");
  placement.validate(skel);
  const double fps = track.fps;
  const double dt = 1.0 / fps;

  std::vector<std::array<Vec3, kSensorCount>> pos(n);
  std::vector<std::array<Mat3, kSensorCount>> rot(n);
  for (std::size_t t = 0; t < n; ++t) {
    const motion::WorldPose pose = motion::forward_kinematics_full(skel, track.frames[t]);
    for (int s = 0; s < kSensorCount; ++s) {
      const SensorMount& m = placement.sensors[s];
      const Mat3& bone = pose.rotations[m.joint];
      pos[t][s] = pose.positions[m.joint] + bone * m.lever;
      rot[t][s] = bone * m.mount;
    }
  }

  InertiaSequence seq;
  seq.fps = fps;
  seq.frames.resize(n);
  const double inv_dt2 = fps * fps;
  for (std::size_t t = 0; t < n; ++t) {
    InertiaFrame& f = seq.frames[t];
    for (int s = 0; s < kSensorCount; ++s) {
      f.q[s] = matrix_to_rot6d(rot[t][s]);
      Vec3 acc;
      if (t == 0) {
        acc = (2.0 * pos[0][s] - 5.0 * pos[1][s] + 4.0 * pos[2][s] - pos[3][s]) * inv_dt2;
      } else if (t == n - 1) {
        acc = (2.0 * pos[n - 1][s] - 5.0 * pos[n - 2][s] + 4.0 * pos[n - 3][s] - pos[n - 4][s]) * inv_dt2;
      } else {
        acc = (pos[t + 1][s] - 2.0 * pos[t][s] + pos[t - 1][s]) * inv_dt2;
      }
      f.a[s] = acc;
      if (t == 0) {
        f.omega[s] = geom::angular_velocity(rot[0][s], rot[1][s], dt);
      } else if (t == n - 1) {
        f.omega[s] = geom::angular_velocity(rot[n - 2][s], rot[n - 1][s], dt);
      } else {
        f.omega[s] = geom::angular_velocity(rot[t - 1][s], rot[t + 1][s], 2.0 * dt);
      }
    }
  }
  return seq;
}

namespace {

Vec3 normal3(Rng& rng, double sigma) {
  return Vec3(rng.normal(0.0, sigma), rng.normal(0.0, sigma), rng.normal(0.0, sigma));
}

void check_sensor_set(const NoiseConfig& cfg) {
  for (int s : cfg.corrupted_sensors) {
    if (s < 0 || s >= kSensorCount) throw Error(ErrorCode::kInvalidArgument, "corrupted sensor index out of range");
  }
}

enum Stream : std::uint64_t { kOrientationStream = 1, kAccelStream = 2, kGyroStream = 3 };

}  // namespace

InertiaSequence apply_drift(const InertiaSequence& seq, const NoiseConfig& cfg) {
  InertiaSequence out = seq;
  const Rng root = Rng(cfg.seed).split(0xd21f7);
  for (int s = 0; s < kSensorCount; ++s) {
    const Rng sensor = root.split(static_cast<std::uint64_t>(s));
    if (cfg.drift.orientation > 0.0) {
      Rng rng = sensor.split(kOrientationStream);
      Mat3 walk = Mat3::Identity();
      for (std::size_t t = 1; t < out.size(); ++t) {
        walk = exp_so3(normal3(rng, cfg.drift.orientation)) * walk;
        out.frames[t].q[s] = matrix_to_rot6d(walk * rot6d_to_matrix(seq.frames[t].q[s]));
      }
    }
    if (cfg.drift.acceleration > 0.0) {
      Rng rng = sensor.split(kAccelStream);
      Vec3 offset = Vec3::Zero();
      for (std::size_t t = 1; t < out.size(); ++t) {
        offset += normal3(rng, cfg.drift.acceleration);
        out.frames[t].a[s] += offset;
      }
    }
    if (cfg.drift.gyro > 0.0) {
      Rng rng = sensor.split(kGyroStream);
      Vec3 offset = Vec3::Zero();
      for (std::size_t t = 1; t < out.size(); ++t) {
        offset += normal3(rng, cfg.drift.gyro);
        out.frames[t].omega[s] += offset;
      }
    }
  }
  return out;
}

InertiaSequence apply_corruption(const InertiaSequence& seq, const NoiseConfig& cfg) {
  check_sensor_set(cfg);
  InertiaSequence out = seq;
  const std::size_t n = seq.size();
  const Rng root = Rng(cfg.seed).split(0xc0441);
  for (int s : cfg.corrupted_sensors) {
    const Rng sensor = root.split(static_cast<std::uint64_t>(s));
    Rng q_rng = sensor.split(kOrientationStream);
    Rng a_rng = sensor.split(kAccelStream);
    Rng w_rng = sensor.split(kGyroStream);
    std::size_t drop_at = n;
    if (cfg.dropout[s]) {
      drop_at = static_cast<std::size_t>(std::floor(std::clamp(cfg.dropout_from, 0.0, 1.0) * n));
    }
    const std::size_t held = drop_at > 0 ? drop_at - 1 : 0;
    for (std::size_t t = 0; t < n; ++t) {
      const InertiaFrame& src = seq.frames[t >= drop_at ? held : t];
      InertiaFrame& dst = out.frames[t];
      dst.q[s] = src.q[s];
      dst.a[s] = src.a[s];
      dst.omega[s] = src.omega[s];
      if (cfg.gaussian.orientation > 0.0) {
        const Mat3 jolt = exp_so3(normal3(q_rng, cfg.gaussian.orientation));
        dst.q[s] = matrix_to_rot6d(jolt * rot6d_to_matrix(src.q[s]));
      }
      if (cfg.gaussian.acceleration > 0.0) dst.a[s] += normal3(a_rng, cfg.gaussian.acceleration);
      if (cfg.gaussian.gyro > 0.0) dst.omega[s] += normal3(w_rng, cfg.gaussian.gyro);
    }
  }
  return out;
}

NormStats fit_norm_stats(std::span<const InertiaSequence> corpus) {
  std::size_t count = 0;
  for (const InertiaSequence& seq : corpus) count += seq.size();
  if (corpus.empty() || count == 0) throw Error(ErrorCode::kEmptyCorpus, "cannot fit statistics on an empty corpus");

  NormStats stats;
  std::array<double, layout::kAccelDims> sum{};
  for (const InertiaSequence& seq : corpus) {
    for (const InertiaFrame& f : seq.frames) {
      for (int s = 0; s < kSensorCount; ++s) {
        for (int k = 0; k < 3; ++k) sum[3 * s + k] += f.a[s][k];
      }
    }
  }
  for (int d = 0; d < layout::kAccelDims; ++d) stats.mean[d] = sum[d] / static_cast<double>(count);
  std::array<double, layout::kAccelDims> sq{};
  for (const InertiaSequence& seq : corpus) {
    for (const InertiaFrame& f : seq.frames) {
      for (int s = 0; s < kSensorCount; ++s) {
        for (int k = 0; k < 3; ++k) {
          const double c = f.a[s][k] - stats.mean[3 * s + k];
          sq[3 * s + k] += c * c;
        }
      }
    }
  }
  for (int d = 0; d < layout::kAccelDims; ++d) {
    stats.stddev[d] = std::max(kMinStd, std::sqrt(sq[d] / static_cast<double>(count)));
  }
  return stats;
}

InertiaSequence normalize_acceleration(const InertiaSequence& seq, const NormStats& stats) {
  InertiaSequence out = seq;
  for (InertiaFrame& f : out.frames) {
    for (int s = 0; s < kSensorCount; ++s) {
      for (int k = 0; k < 3; ++k) f.a[s][k] = (f.a[s][k] - stats.mean[3 * s + k]) / stats.stddev[3 * s + k];
    }
  }
  return out;
}

InertiaSequence denormalize_acceleration(const InertiaSequence& seq, const NormStats& stats) {
  InertiaSequence out = seq;
  for (InertiaFrame& f : out.frames) {
    for (int s = 0; s < kSensorCount; ++s) {
      for (int k = 0; k < 3; ++k) f.a[s][k] = f.a[s][k] * stats.stddev[3 * s + k] + stats.mean[3 * s + k];
    }
  }
  return out;
}

}  // namespace jrtok::imu
