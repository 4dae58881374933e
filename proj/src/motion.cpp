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

#include "jrtok/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jrtok/error.hpp"
#include "jrtok/rng.hpp"

namespace jrtok::motion {

using geom::angular_velocity;
using geom::matrix_to_rot6d;
using geom::rot6d_to_matrix_or_identity;

// ---------------------------------------------------------------------------
// Skeleton

void Skeleton::validate() const {
  const int n = joint_count();
  if (n < 1 || static_cast<int>(rest_offset.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, "skeleton parent/offset size mismatch");
  }
  if (parent[0] != -1) throw Error(ErrorCode::kInvalidArgument, "joint 0 must be the root");
  std::vector<int> children(n, 0);
  for (int j = 1; j < n; ++j) {
    if (parent[j] < 0 || parent[j] >= j) {
      throw Error(ErrorCode::kInvalidArgument, "parent indices must precede their children");
    }
    ++children[parent[j]];
  }
  for (const Vec3& o : rest_offset) {
    if (!o.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite rest offset");
  }
  for (int f : foot_joints) {
    if (f <= 0 || f >= n || children[f] != 0) {
      throw Error(ErrorCode::kInvalidArgument, "foot joints must be leaves");
    }
  }
}

const Skeleton& Skeleton::standard() {
  static const Skeleton skel = [] {
    Skeleton s;
    auto add = [&s](const char* name, int parent, double x, double y, double z) {
      s.names.emplace_back(name);
      s.parent.push_back(parent);
      s.rest_offset.emplace_back(x, y, z);
    };
    add("pelvis", -1, 0.0, 0.0, 0.0);
    add("left_hip", 0, 0.09, -0.07, 0.0);
    add("left_knee", 1, 0.0, -0.40, 0.0);
    add("left_ankle", 2, 0.0, -0.40, 0.0);
    add("left_toe", 3, 0.0, -0.055, 0.13);
    add("left_heel", 3, 0.0, -0.055, -0.05);
    add("right_hip", 0, -0.09, -0.07, 0.0);
    add("right_knee", 6, 0.0, -0.40, 0.0);
    add("right_ankle", 7, 0.0, -0.40, 0.0);
    add("right_toe", 8, 0.0, -0.055, 0.13);
    add("right_heel", 8, 0.0, -0.055, -0.05);
    add("spine1", 0, 0.0, 0.10, -0.01);
    add("spine2", 11, 0.0, 0.13, 0.0);
    add("spine3", 12, 0.0, 0.13, 0.01);
    add("neck", 13, 0.0, 0.12, 0.0);
    add("head", 14, 0.0, 0.10, 0.02);
    add("left_shoulder", 13, 0.17, 0.06, 0.0);
    add("left_elbow", 16, 0.0, -0.28, 0.0);
    add("left_wrist", 17, 0.0, -0.25, 0.0);
    add("right_shoulder", 13, -0.17, 0.06, 0.0);
    add("right_elbow", 19, 0.0, -0.28, 0.0);
    add("right_wrist", 20, 0.0, -0.25, 0.0);
    s.foot_joints = {joints::kLeftToe, joints::kLeftHeel, joints::kRightToe, joints::kRightHeel};
    s.validate();
    return s;
  }();
  return skel;
}

// ---------------------------------------------------------------------------
// Forward kinematics

WorldPose forward_kinematics_full(const Skeleton& skel, const PoseFrame& frame) {
  const int n = skel.joint_count();
  if (static_cast<int>(frame.local_rotations.size()) != n - 1) {
    throw Error(ErrorCode::kShapeMismatch, "pose frame joint count does not match skeleton");
  }
  WorldPose pose;
  pose.positions.resize(n);
  pose.rotations.resize(n);
  pose.positions[0] = frame.root_translation;
  pose.rotations[0] = frame.root_rotation;
  for (int j = 1; j < n; ++j) {
    const int p = skel.parent[j];
    pose.positions[j] = pose.positions[p] + pose.rotations[p] * skel.rest_offset[j];
    pose.rotations[j] = pose.rotations[p] * frame.local_rotations[j - 1];
  }
  return pose;
}

std::vector<Vec3> forward_kinematics(const Skeleton& skel, const PoseFrame& frame) {
  return forward_kinematics_full(skel, frame).positions;
}

// ---------------------------------------------------------------------------
// Flattening

void MotionFrame::flatten_into(std::span<double> out) const {
  auto put3 = [&out](int at, const Vec3& v) {
    out[at] = v.x();
    out[at + 1] = v.y();
    out[at + 2] = v.z();
  };
  auto put6 = [&out](int at, const Rot6D& r) { std::copy(r.values.begin(), r.values.end(), out.begin() + at); };
  put3(layout::kRoot, r);
  put3(layout::kRootVel, r_dot);
  put6(layout::kRootRot, phi);
  put3(layout::kRootAngVel, phi_dot);
  for (int j = 0; j < kLocalJoints; ++j) {
    put6(layout::kJointRot + 6 * j, j_r[j]);
    put3(layout::kJointPos + 3 * j, j_p[j]);
    put3(layout::kJointVel + 3 * j, j_v[j]);
  }
  for (int i = 0; i < kFootCount; ++i) out[layout::kContact + i] = contacts[i];
}

MotionFrame MotionFrame::unflatten(std::span<const double> in) {
  auto get3 = [&in](int at) { return Vec3(in[at], in[at + 1], in[at + 2]); };
  auto get6 = [&in](int at) {
    Rot6D r;
    std::copy(in.begin() + at, in.begin() + at + 6, r.values.begin());
    return r;
  };
  MotionFrame f;
  f.r = get3(layout::kRoot);
  f.r_dot = get3(layout::kRootVel);
  f.phi = get6(layout::kRootRot);
  f.phi_dot = get3(layout::kRootAngVel);
  for (int j = 0; j < kLocalJoints; ++j) {
    f.j_r[j] = get6(layout::kJointRot + 6 * j);
    f.j_p[j] = get3(layout::kJointPos + 3 * j);
    f.j_v[j] = get3(layout::kJointVel + 3 * j);
  }
  for (int i = 0; i < kFootCount; ++i) f.contacts[i] = in[layout::kContact + i];
  return f;
}

std::vector<double> MotionSequence::flatten() const {
  std::vector<double> out(frames.size() * layout::kWidth);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    frames[t].flatten_into(std::span<double>(out).subspan(t * layout::kWidth, layout::kWidth));
  }
  return out;
}

MotionSequence MotionSequence::unflatten(std::span<const double> data, double fps) {
  if (data.size() % layout::kWidth != 0) {
    throw Error(ErrorCode::kShapeMismatch, "motion data is not a multiple of the frame width");
  }
  MotionSequence seq;
  seq.fps = fps;
  const std::size_t n = data.size() / layout::kWidth;
  seq.frames.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    seq.frames.push_back(MotionFrame::unflatten(data.subspan(t * layout::kWidth, layout::kWidth)));
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Representation

namespace {

std::vector<Vec3> central_difference(std::span<const Vec3> x, double fps) {
  const std::size_t n = x.size();
  std::vector<Vec3> v(n, Vec3::Zero());
  if (n < 2) return v;
  v[0] = (x[1] - x[0]) * fps;
  v[n - 1] = (x[n - 1] - x[n - 2]) * fps;
  for (std::size_t t = 1; t + 1 < n; ++t) v[t] = (x[t + 1] - x[t - 1]) * (0.5 * fps);
  return v;
}

std::vector<Vec3> body_angular_velocity(std::span<const Mat3> rot, double fps) {
  const std::size_t n = rot.size();
  std::vector<Vec3> w(n, Vec3::Zero());
  if (n < 2) return w;
  const double dt = 1.0 / fps;
  w[0] = angular_velocity(rot[0], rot[1], dt);
  w[n - 1] = angular_velocity(rot[n - 2], rot[n - 1], dt);
  for (std::size_t t = 1; t + 1 < n; ++t) w[t] = angular_velocity(rot[t - 1], rot[t + 1], 2.0 * dt);
  return w;
}

}  // namespace

std::vector<std::array<double, kFootCount>> derive_contacts(
    std::span<const std::array<Vec3, kFootCount>> foot_positions, double fps) {
  const std::size_t n = foot_positions.size();
  std::vector<std::array<double, kFootCount>> labels(n);
  for (int i = 0; i < kFootCount; ++i) {
    std::vector<Vec3> track(n);
    for (std::size_t t = 0; t < n; ++t) track[t] = foot_positions[t][i];
    const std::vector<Vec3> vel = central_difference(track, fps);
    for (std::size_t t = 0; t < n; ++t) {
      const bool low = track[t].y() < kContactHeight;
      const bool slow = vel[t].norm() < kContactSpeed;
      labels[t][i] = (low && slow) ? 1.0 : 0.0;
    }
  }
  return labels;
}

MotionSequence build_motion_representation(const RawPoseTrack& track, const Skeleton& skel) {
  const std::size_t n = track.size();
  if (n < 3) throw Error(ErrorCode::kTooShort, "motion representation needs at least 3 frames");
  if (skel.joint_count() != kJointCount) {
    throw Error(ErrorCode::kShapeMismatch, "motion representation requires the 22-joint skeleton");
  }
  const double fps = track.fps;

  std::vector<Vec3> root(n);
  std::vector<Mat3> root_rot(n);
  std::vector<std::vector<Vec3>> world(kJointCount, std::vector<Vec3>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const PoseFrame& f = track.frames[t];
    root[t] = f.root_translation;
    root_rot[t] = f.root_rotation;
    const std::vector<Vec3> pos = forward_kinematics(skel, f);
    for (int j = 0; j < kJointCount; ++j) world[j][t] = pos[j];
  }

  const std::vector<Vec3> root_vel = central_difference(root, fps);
  const std::vector<Vec3> root_ang = body_angular_velocity(root_rot, fps);
  std::vector<std::vector<Vec3>> joint_vel(kJointCount);
  for (int j = 1; j < kJointCount; ++j) joint_vel[j] = central_difference(world[j], fps);

  std::vector<std::array<Vec3, kFootCount>> feet(n);
  for (std::size_t t = 0; t < n; ++t) {
    for (int i = 0; i < kFootCount; ++i) feet[t][i] = world[skel.foot_joints[i]][t];
  }
  const auto contacts = derive_contacts(feet, fps);

  MotionSequence seq;
  seq.fps = fps;
  seq.frames.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    MotionFrame& m = seq.frames[t];
    m.r = root[t];
    m.r_dot = root_vel[t];
    m.phi = matrix_to_rot6d(root_rot[t]);
    m.phi_dot = root_ang[t];
    for (int j = 1; j < kJointCount; ++j) {
      m.j_r[j - 1] = matrix_to_rot6d(track.frames[t].local_rotations[j - 1]);
      m.j_p[j - 1] = world[j][t] - root[t];
      m.j_v[j - 1] = joint_vel[j][t];
    }
    m.contacts = contacts[t];
  }
  return seq;
}

std::vector<std::vector<Vec3>> joint_positions(const MotionSequence& seq, const Skeleton& skel) {
  std::vector<std::vector<Vec3>> out;
  out.reserve(seq.size());
  PoseFrame pose;
  pose.local_rotations.resize(kLocalJoints);
  for (const MotionFrame& m : seq.frames) {
    pose.root_translation = m.r;
    pose.root_rotation = rot6d_to_matrix_or_identity(m.phi);
    for (int j = 0; j < kLocalJoints; ++j) pose.local_rotations[j] = rot6d_to_matrix_or_identity(m.j_r[j]);
    out.push_back(forward_kinematics(skel, pose));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic motion

std::string_view to_string(Style style) {
  switch (style) {
    case Style::kWalk: return "walk";
    case Style::kSquat: return "squat";
    case Style::kArmRaise: return "arm_raise";
    case Style::kIdleSway: return "idle_sway";
  }
  return "unknown";
}

Style style_from_string(std::string_view name) {
  if (name == "walk") return Style::kWalk;
  if (name == "squat") return Style::kSquat;
  if (name == "arm_raise") return Style::kArmRaise;
  if (name == "idle_sway") return Style::kIdleSway;
  throw Error(ErrorCode::kInvalidArgument, "unknown motion style: " + std::string(name));
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFootClearance = 0.002;
constexpr double kSoftMinTemperature = 0.005;

Mat3 rx(double a) { return geom::exp_so3(Vec3(a, 0.0, 0.0)); }
Mat3 ry(double a) { return geom::exp_so3(Vec3(0.0, a, 0.0)); }
Mat3 rz(double a) { return geom::exp_so3(Vec3(0.0, 0.0, a)); }

/// Joint angles for one frame. Only the joints a style animates are set.
struct Angles {
  Mat3 root = Mat3::Identity();
  std::array<Mat3, kJointCount> local;
  Angles() { local.fill(Mat3::Identity()); }
};

/// Smooth periodic signal with a randomized second harmonic.
struct Oscillator {
  double freq = 1.0;
  double phase = 0.0;
  double harmonic = 0.0;
  double harmonic_phase = 0.0;

  double operator()(double t, double offset = 0.0) const {
    const double p = kTwoPi * freq * t + phase + offset;
    return std::sin(p) + harmonic * std::sin(2.0 * p + harmonic_phase);
  }
  double raised(double t) const { return 0.5 * (1.0 - std::cos(kTwoPi * freq * t + phase)); }
};

Oscillator random_oscillator(Rng& rng, double f_lo, double f_hi) {
  Oscillator o;
  o.freq = rng.uniform(f_lo, f_hi);
  o.phase = rng.uniform(0.0, kTwoPi);
  o.harmonic = rng.uniform(0.0, 0.15);
  o.harmonic_phase = rng.uniform(0.0, kTwoPi);
  return o;
}

void set(Angles& a, int joint, const Mat3& r) { a.local[joint] = r; }

/// Places the root so the lowest foot joint rests on the ground and the
/// planted foot does not slide horizontally.
void anchor_to_ground(RawPoseTrack& track, const Skeleton& skel, const Vec3& start) {
  const std::size_t n = track.size();
  std::vector<std::array<Vec3, kFootCount>> feet(n);
  for (std::size_t t = 0; t < n; ++t) {
    PoseFrame f = track.frames[t];
    f.root_translation = Vec3::Zero();
    const std::vector<Vec3> pos = forward_kinematics(skel, f);
    for (int i = 0; i < kFootCount; ++i) feet[t][i] = pos[skel.foot_joints[i]];
  }
  auto weights = [&](std::size_t t, double& soft_min) {
    double lo = feet[t][0].y();
    for (int i = 1; i < kFootCount; ++i) lo = std::min(lo, feet[t][i].y());
    std::array<double, kFootCount> w{};
    double total = 0.0;
    for (int i = 0; i < kFootCount; ++i) {
      w[i] = std::exp(-(feet[t][i].y() - lo) / kSoftMinTemperature);
      total += w[i];
    }
    for (double& wi : w) wi /= total;
    soft_min = lo - kSoftMinTemperature * std::log(total);
    return w;
  };
  Vec3 horizontal(start.x(), 0.0, start.z());
  for (std::size_t t = 0; t < n; ++t) {
    double soft_min = 0.0;
    const auto w = weights(t, soft_min);
    if (t > 0) {
      Vec3 step = Vec3::Zero();
      for (int i = 0; i < kFootCount; ++i) step += w[i] * (feet[t][i] - feet[t - 1][i]);
      horizontal -= Vec3(step.x(), 0.0, step.z());
    }
    track.frames[t].root_translation = Vec3(horizontal.x(), kFootClearance - soft_min, horizontal.z());
  }
}

Angles walk_pose(double t, double freq, double phase0, double hip_amp, double knee_amp, double arm_amp,
                 double sway, const Oscillator& torso) {
  using namespace joints;
  Angles a;
  const double base = kTwoPi * freq * t + phase0;
  for (int side = 0; side < 2; ++side) {
    const double ph = base + side * std::numbers::pi;
    const double hip = -hip_amp * std::sin(ph);
    const double k = 0.5 * (1.0 + std::cos(ph));
    const double knee = knee_amp * k * k;
    const double ankle = -0.8 * (hip + knee);
    const int hip_j = side == 0 ? kLeftHip : kRightHip;
    set(a, hip_j, rx(hip));
    set(a, hip_j + 1, rx(knee));
    set(a, hip_j + 2, rx(ankle));
    const int shoulder = side == 0 ? kLeftShoulder : kRightShoulder;
    const double abduct = side == 0 ? 0.08 : -0.08;
    set(a, shoulder, rz(abduct) * rx(arm_amp * std::sin(ph)));
    set(a, shoulder + 1, rx(-0.25 - 0.15 * (1.0 + std::sin(ph))));
  }
  set(a, kSpine1, ry(0.06 * std::sin(base)) * rx(0.03));
  set(a, kSpine2, ry(0.04 * std::sin(base)));
  set(a, kNeck, rx(0.05 * torso(t)));
  a.root = rz(sway * std::sin(base));
  return a;
}

}  // namespace

RawPoseTrack generate_synthetic_motion(std::uint64_t seed, double duration_s, double fps, Style style) {
  if (!(duration_s > 0.0)) throw Error(ErrorCode::kInvalidArgument, "duration must be positive");
  if (!(fps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "fps must be positive");
  using namespace joints;
  const Skeleton& skel = Skeleton::standard();
  Rng rng = Rng(seed).split(static_cast<std::uint64_t>(style) + 1);
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(duration_s * fps)));
  const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const Vec3 start(rng.uniform(-0.5, 0.5), 0.0, rng.uniform(-0.5, 0.5));
  const Mat3 heading_rot = ry(heading);

  std::vector<Angles> poses(n);
  switch (style) {
    case Style::kWalk: {
      const double freq = rng.uniform(0.8, 1.1);
      const double phase0 = rng.uniform(0.0, kTwoPi);
      const double hip_amp = rng.uniform(0.3, 0.45);
      const double knee_amp = rng.uniform(0.5, 0.8);
      const double arm_amp = rng.uniform(0.2, 0.4);
      const double sway = rng.uniform(0.02, 0.05);
      const Oscillator torso = random_oscillator(rng, 0.2, 0.5);
      for (std::size_t t = 0; t < n; ++t) {
        poses[t] = walk_pose(t / fps, freq, phase0, hip_amp, knee_amp, arm_amp, sway, torso);
      }
      break;
    }
    case Style::kSquat: {
      const Oscillator depth = random_oscillator(rng, 0.3, 0.5);
      const double amp = rng.uniform(0.5, 0.9);
      const double arms = rng.uniform(0.8, 1.3);
      const double lean = rng.uniform(0.2, 0.4);
      for (std::size_t t = 0; t < n; ++t) {
        Angles& a = poses[t];
        const double th = amp * depth.raised(t / fps);
        for (int hip_j : {kLeftHip, kRightHip}) {
          set(a, hip_j, rx(-th));
          set(a, hip_j + 1, rx(2.0 * th));
          set(a, hip_j + 2, rx(-th));
        }
        set(a, kSpine1, rx(lean * th));
        set(a, kLeftShoulder, rx(-arms * th));
        set(a, kRightShoulder, rx(-arms * th));
        set(a, kNeck, rx(-0.5 * lean * th));
      }
      break;
    }
    case Style::kArmRaise: {
      const Oscillator raise = random_oscillator(rng, 0.2, 0.4);
      const double amp = rng.uniform(1.2, 2.0);
      const double asym = rng.uniform(0.7, 1.0);
      const double elbow = rng.uniform(0.0, 0.4);
      for (std::size_t t = 0; t < n; ++t) {
        Angles& a = poses[t];
        const double c = amp * raise.raised(t / fps);
        set(a, kLeftShoulder, rz(c));
        set(a, kRightShoulder, rz(-asym * c));
        set(a, kLeftElbow, rx(-elbow * c / amp));
        set(a, kRightElbow, rx(-elbow * c / amp));
        set(a, kSpine3, rx(-0.05 * c / amp));
      }
      break;
    }
    case Style::kIdleSway: {
      const Oscillator pelvis = random_oscillator(rng, 0.2, 0.5);
      const Oscillator spine = random_oscillator(rng, 0.2, 0.5);
      const Oscillator head = random_oscillator(rng, 0.2, 0.5);
      const double amp = rng.uniform(0.02, 0.05);
      for (std::size_t t = 0; t < n; ++t) {
        Angles& a = poses[t];
        const double s = t / fps;
        a.root = rz(amp * pelvis(s)) * rx(0.5 * amp * pelvis(s, 1.0));
        set(a, kSpine1, rz(-amp * pelvis(s)));
        set(a, kSpine2, rx(amp * spine(s)));
        set(a, kHead, ry(1.5 * amp * head(s)) * rx(amp * head(s, 0.7)));
        set(a, kLeftShoulder, rz(0.1 + amp * spine(s, 0.3)));
        set(a, kRightShoulder, rz(-0.1 - amp * spine(s, 0.9)));
      }
      break;
    }
  }

  RawPoseTrack track;
  track.fps = fps;
  track.frames.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    PoseFrame& f = track.frames[t];
    f.root_rotation = heading_rot * poses[t].root;
    f.local_rotations.assign(poses[t].local.begin() + 1, poses[t].local.end());
  }
  anchor_to_ground(track, skel, start);
  return track;
}

RawPoseTrack resample(const RawPoseTrack& track, double target_fps) {
  if (!(target_fps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "target fps must be positive");
  if (target_fps == track.fps || track.size() < 2) {
    RawPoseTrack out = track;
    out.fps = target_fps;
    return out;
  }
  const std::size_t n_in = track.size();
  const double ratio = track.fps / target_fps;
  const auto n_out = static_cast<std::size_t>(std::floor((n_in - 1) / ratio + 1e-9)) + 1;
  RawPoseTrack out;
  out.fps = target_fps;
  out.frames.resize(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double u = k * ratio;
    std::size_t i = std::min(static_cast<std::size_t>(std::floor(u + 1e-9)), n_in - 1);
    double alpha = std::max(0.0, u - static_cast<double>(i));
    if (i == n_in - 1) alpha = 0.0;
    const PoseFrame& a = track.frames[i];
    PoseFrame& f = out.frames[k];
    if (alpha < 1e-12) {
      f = a;
      continue;
    }
    const PoseFrame& b = track.frames[i + 1];
    f.root_translation = (1.0 - alpha) * a.root_translation + alpha * b.root_translation;
    f.root_rotation = geom::slerp(a.root_rotation, b.root_rotation, alpha);
    f.local_rotations.resize(a.local_rotations.size());
    for (std::size_t j = 0; j < a.local_rotations.size(); ++j) {
      f.local_rotations[j] = geom::slerp(a.local_rotations[j], b.local_rotations[j], alpha);
    }
  }
  return out;
}

RawPoseTrack translated(const RawPoseTrack& track, const Vec3& offset) {
  RawPoseTrack out = track;
  for (PoseFrame& f : out.frames) f.root_translation += offset;
  return out;
}

}  // namespace jrtok::motion
