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

#include <optional>
#include <string_view>
#include <vector>

#include "jrtok/config.hpp"
#include "jrtok/digest.hpp"
#include "jrtok/gradnet/layers.hpp"
#include "jrtok/imusim.hpp"
#include "jrtok/motion.hpp"
#include "jrtok/vqcodec.hpp"

namespace jrtok::model {

using gradnet::NamedParam;
using gradnet::Tensor;

enum class ModelKind { kMotionVqVae, kImuTokenizer, kBaselinePoser };

std::string_view to_string(ModelKind kind);
/// Throws FormatError for unknown names.
ModelKind model_kind_from_string(std::string_view name);

/// The shape-determining hyperparameters; their digest identifies which
/// checkpoints are interchangeable.
struct Architecture {
  ModelKind kind = ModelKind::kMotionVqVae;
  std::size_t in_width = 0;
  std::size_t out_width = 0;
  std::size_t hidden = 0;
  std::size_t latent = 0;
  std::size_t codebook_size = 0;  // 0 for the baseline

  Digest digest() const;
};

/// Frame-major (frames x width) <-> channel-major (width x frames).
std::vector<double> to_channel_major(std::span<const double> frame_major, std::size_t width);
std::vector<double> to_frame_major(std::span<const double> channel_major, std::size_t width);

/// [1, 271, T] / [1, 72, T] inputs from sequences.
Tensor motion_tensor(const motion::MotionSequence& seq);
Tensor imu_tensor(const imu::InertiaSequence& seq);
/// Batch item b of a [B, 271, T] tensor.
motion::MotionSequence motion_from_tensor(const Tensor& x, std::size_t b, double fps);

/// Maps the four contact logits of a [B, 271, T] decoder output to (0, 1).
Tensor apply_contact_sigmoid(const Tensor& raw);

/// Deep copy of parameter values between two identically shaped lists.
/// Throws CheckpointMismatch on name or shape disagreement.
void copy_parameter_values(const std::vector<NamedParam>& from, const std::vector<NamedParam>& to);

/// SHA-256 over names, shapes and values of a parameter list.
Digest parameter_digest(const std::vector<NamedParam>& params);

class MotionVqVae {
 public:
  MotionVqVae() = default;
  MotionVqVae(const TrainConfig& cfg, std::uint64_t seed);

  /// [B, 271, T] -> [B, d_z, T / 4]
  Tensor encode(const Tensor& motion) const;
  /// [B, d_z, S] -> [B, 271, 4 S] with contact probabilities.
  Tensor decode(const Tensor& latents) const;

  /// Encodes, quantizes and decodes; input truncated to a multiple of 4.
  motion::MotionSequence reconstruct(const motion::MotionSequence& seq) const;
  std::vector<vq::Token> tokenize(const motion::MotionSequence& seq) const;

  std::vector<NamedParam> parameters() const;
  void set_trainable(bool on) const;

  vq::Codebook& codebook() { return codebook_; }
  const vq::Codebook& codebook() const { return codebook_; }
  const gradnet::SequenceDecoder& decoder() const { return decoder_; }
  Architecture architecture() const;

 private:
  gradnet::NetShape shape_;
  gradnet::SequenceEncoder encoder_;
  gradnet::SequenceDecoder decoder_;
  vq::Codebook codebook_;
};

/// IMU encoder and codebook, bundled with a private copy of the frozen motion
/// decoder and the acceleration statistics so one checkpoint decodes tokens.
class ImuTokenizer {
 public:
  ImuTokenizer() = default;
  /// The motion decoder weights are copied, not shared.
  ImuTokenizer(const TrainConfig& cfg, std::uint64_t seed, const MotionVqVae& motion_model);
  /// Fresh decoder (to be filled from a checkpoint).
  ImuTokenizer(const TrainConfig& cfg, std::uint64_t seed);

  /// [B, 72, T] normalized IMU -> [B, d_z, T / 4]
  Tensor encode(const Tensor& imu) const;
  /// [B, d_z, S] codes -> [B, 271, 4 S]
  Tensor decode(const Tensor& codes) const;

  /// Normalizes with the attached stats, encodes and quantizes. Throws
  /// StatsMissing; the input is truncated to a multiple of 4.
  std::vector<vq::Token> tokenize(const imu::InertiaSequence& raw) const;
  /// tokenize() on data that is already normalized.
  std::vector<vq::Token> tokenize_normalized(const imu::InertiaSequence& normalized) const;
  /// Motion for a token list; 4 frames per token. Throws OutOfRange.
  motion::MotionSequence decode_tokens(std::span<const vq::Token> tokens, double fps) const;

  std::vector<NamedParam> parameters() const;  // encoder only
  std::vector<NamedParam> decoder_parameters() const;

  vq::Codebook& codebook() { return codebook_; }
  const vq::Codebook& codebook() const { return codebook_; }
  const std::optional<imu::NormStats>& stats() const { return stats_; }
  void set_stats(const imu::NormStats& stats) { stats_ = stats; }
  Architecture architecture() const;

 private:
  gradnet::NetShape shape_;
  gradnet::SequenceEncoder encoder_;
  gradnet::SequenceDecoder decoder_;
  vq::Codebook codebook_;
  std::optional<imu::NormStats> stats_;
};

/// Continuous IMU -> motion regressor with the same encoder capacity as the
/// IMU tokenizer and the same decoder shape as the motion model.
class BaselinePoser {
 public:
  BaselinePoser() = default;
  BaselinePoser(const TrainConfig& cfg, std::uint64_t seed);

  /// [B, 72, T] normalized -> [B, 271, T]
  Tensor forward(const Tensor& imu) const;
  /// Normalizes with the attached stats; throws StatsMissing.
  motion::MotionSequence predict(const imu::InertiaSequence& raw) const;
  motion::MotionSequence predict_normalized(const imu::InertiaSequence& normalized) const;

  std::vector<NamedParam> parameters() const;
  const std::optional<imu::NormStats>& stats() const { return stats_; }
  void set_stats(const imu::NormStats& stats) { stats_ = stats; }
  Architecture architecture() const;

 private:
  gradnet::NetShape shape_;
  gradnet::SequenceEncoder encoder_;
  gradnet::SequenceDecoder decoder_;
  std::optional<imu::NormStats> stats_;
};

}  // namespace jrtok::model
