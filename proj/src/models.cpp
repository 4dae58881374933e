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

#include "jrtok/models.hpp"

#include <cstring>

#include "jrtok/error.hpp"
#include "jrtok/gradnet/ops.hpp"

namespace jrtok::model {

namespace g = gradnet;
namespace ml = motion::layout;
namespace il = imu::layout;

namespace {

g::NetShape net_shape(const TrainConfig& cfg) { return {cfg.hidden, cfg.latent_dim, 0.2}; }

std::size_t usable_frames(std::size_t frames) {
  const std::size_t usable = frames - frames % g::SequenceEncoder::kDownsample;
  if (usable == 0) throw Error(ErrorCode::kTooShort, "need at least 4 frames to tokenize");
  return usable;
}

template <typename Seq>
Seq truncated(const Seq& seq) {
  Seq out = seq;
  out.frames.resize(usable_frames(seq.size()));
  return out;
}

Tensor quantized_codes(const Tensor& latents, const vq::Codebook& cb, std::vector<vq::Token>* tokens) {
  const Tensor rows = g::to_rows(latents.detach());
  vq::Quantized q = vq::quantize(rows.values(), cb);
  if (tokens) *tokens = q.indices;
  return g::from_rows(Tensor::from(rows.shape(), std::move(q.codes)), latents.dim(0));
}

const imu::NormStats& require_stats(const std::optional<imu::NormStats>& stats) {
  if (!stats) throw Error(ErrorCode::kStatsMissing, "no normalization statistics attached");
  return *stats;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMotionVqVae: return "motion_vqvae";
    case ModelKind::kImuTokenizer: return "imu_tokenizer";
    case ModelKind::kBaselinePoser: return "baseline_poser";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (ModelKind k : {ModelKind::kMotionVqVae, ModelKind::kImuTokenizer, ModelKind::kBaselinePoser}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kFormatError, "unknown model kind '" + std::string(name) + "'");
}

Digest Architecture::digest() const {
  const std::string text = "kind=" + std::string(to_string(kind)) + ";in=" + std::to_string(in_width) +
                           ";out=" + std::to_string(out_width) + ";hidden=" + std::to_string(hidden) +
                           ";latent=" + std::to_string(latent) + ";K=" + std::to_string(codebook_size);
  return sha256(text);
}

std::vector<double> to_channel_major(std::span<const double> frame_major, std::size_t width) {
  const std::size_t frames = frame_major.size() / width;
  std::vector<double> out(frame_major.size());
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t c = 0; c < width; ++c) out[c * frames + t] = frame_major[t * width + c];
  return out;
}

std::vector<double> to_frame_major(std::span<const double> channel_major, std::size_t width) {
  const std::size_t frames = channel_major.size() / width;
  std::vector<double> out(channel_major.size());
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t c = 0; c < width; ++c) out[t * width + c] = channel_major[c * frames + t];
  return out;
}

Tensor motion_tensor(const motion::MotionSequence& seq) {
  return Tensor::from({1, ml::kWidth, seq.size()}, to_channel_major(seq.flatten(), ml::kWidth));
}

Tensor imu_tensor(const imu::InertiaSequence& seq) {
  return Tensor::from({1, il::kWidth, seq.size()}, to_channel_major(seq.flatten(), il::kWidth));
}

motion::MotionSequence motion_from_tensor(const Tensor& x, std::size_t b, double fps) {
  if (x.rank() != 3 || x.dim(1) != ml::kWidth || b >= x.dim(0)) {
    throw Error(ErrorCode::kShapeMismatch, "expected [B, 271, T], got " + g::shape_string(x.shape()));
  }
  const std::size_t block = x.dim(1) * x.dim(2);
  return motion::MotionSequence::unflatten(to_frame_major(x.values().subspan(b * block, block), ml::kWidth), fps);
}

Tensor apply_contact_sigmoid(const Tensor& raw) {
  const std::vector<Tensor> parts = {g::slice_channels(raw, 0, ml::kContact),
                                     g::sigmoid(g::slice_channels(raw, ml::kContact, motion::kFootCount))};
  return g::concat_channels(parts);
}

void copy_parameter_values(const std::vector<NamedParam>& from, const std::vector<NamedParam>& to) {
  if (from.size() != to.size()) throw Error(ErrorCode::kCheckpointMismatch, "parameter count differs");
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i].name != to[i].name || from[i].tensor.shape() != to[i].tensor.shape()) {
      throw Error(ErrorCode::kCheckpointMismatch, "parameter mismatch at " + from[i].name);
    }
  }
  for (std::size_t i = 0; i < from.size(); ++i) {
    Tensor dst = to[i].tensor;
    const auto src = from[i].tensor.values();
    std::copy(src.begin(), src.end(), dst.mutable_values().begin());
  }
}

Digest parameter_digest(const std::vector<NamedParam>& params) {
  std::vector<std::uint8_t> bytes;
  auto put = [&bytes](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  };
  for (const NamedParam& p : params) {
    put(p.name.data(), p.name.size());
    bytes.push_back(0);
    for (std::size_t d : p.tensor.shape()) {
      const auto v = static_cast<std::uint64_t>(d);
      put(&v, sizeof v);
    }
    put(p.tensor.values().data(), p.tensor.numel() * sizeof(double));
  }
  return sha256(bytes);
}

// ---------------------------------------------------------------------------

MotionVqVae::MotionVqVae(const TrainConfig& cfg, std::uint64_t seed) : shape_(net_shape(cfg)) {
  const Rng root(seed);
  Rng enc_rng = root.split(1), dec_rng = root.split(2), cb_rng = root.split(3);
  encoder_ = g::SequenceEncoder(ml::kWidth, shape_, enc_rng);
  decoder_ = g::SequenceDecoder(ml::kWidth, shape_, dec_rng);
  codebook_ = vq::Codebook(cfg.codebook_size, cfg.latent_dim, cfg.gamma, cb_rng);
}

Tensor MotionVqVae::encode(const Tensor& motion) const { return encoder_.forward(motion); }

Tensor MotionVqVae::decode(const Tensor& latents) const { return apply_contact_sigmoid(decoder_.forward(latents)); }

motion::MotionSequence MotionVqVae::reconstruct(const motion::MotionSequence& seq) const {
  const Tensor codes = quantized_codes(encode(motion_tensor(truncated(seq))), codebook_, nullptr);
  return motion_from_tensor(decode(codes), 0, seq.fps);
}

std::vector<vq::Token> MotionVqVae::tokenize(const motion::MotionSequence& seq) const {
  std::vector<vq::Token> tokens;
  quantized_codes(encode(motion_tensor(truncated(seq))), codebook_, &tokens);
  return tokens;
}

std::vector<NamedParam> MotionVqVae::parameters() const {
  std::vector<NamedParam> out;
  encoder_.collect("encoder", out);
  decoder_.collect("decoder", out);
  return out;
}

void MotionVqVae::set_trainable(bool on) const {
  for (NamedParam& p : parameters()) p.tensor.set_requires_grad(on);
}

Architecture MotionVqVae::architecture() const {
  return {ModelKind::kMotionVqVae, ml::kWidth, ml::kWidth, shape_.hidden, shape_.latent, codebook_.size()};
}

// ---------------------------------------------------------------------------

ImuTokenizer::ImuTokenizer(const TrainConfig& cfg, std::uint64_t seed) : shape_(net_shape(cfg)) {
  const Rng root(seed);
  Rng enc_rng = root.split(11), dec_rng = root.split(12), cb_rng = root.split(13);
  encoder_ = g::SequenceEncoder(il::kWidth, shape_, enc_rng);
  decoder_ = g::SequenceDecoder(ml::kWidth, shape_, dec_rng);
  codebook_ = vq::Codebook(cfg.codebook_size, cfg.latent_dim, cfg.gamma, cb_rng);
  for (NamedParam& p : decoder_parameters()) p.tensor.set_requires_grad(false);
}

ImuTokenizer::ImuTokenizer(const TrainConfig& cfg, std::uint64_t seed, const MotionVqVae& motion_model)
    : ImuTokenizer(cfg, seed) {
  const Architecture arch = motion_model.architecture();
  if (arch.latent != cfg.latent_dim || arch.codebook_size != cfg.codebook_size || arch.hidden != cfg.hidden) {
    throw Error(ErrorCode::kCheckpointMismatch, "motion model d_z/K/hidden differ from the IMU config");
  }
  std::vector<NamedParam> src;
  motion_model.decoder().collect("decoder", src);
  copy_parameter_values(src, decoder_parameters());
}

Tensor ImuTokenizer::encode(const Tensor& imu) const { return encoder_.forward(imu); }

Tensor ImuTokenizer::decode(const Tensor& codes) const { return apply_contact_sigmoid(decoder_.forward(codes)); }

std::vector<vq::Token> ImuTokenizer::tokenize(const imu::InertiaSequence& raw) const {
  return tokenize_normalized(imu::normalize_acceleration(raw, require_stats(stats_)));
}

std::vector<vq::Token> ImuTokenizer::tokenize_normalized(const imu::InertiaSequence& normalized) const {
  std::vector<vq::Token> tokens;
  quantized_codes(encode(imu_tensor(truncated(normalized))), codebook_, &tokens);
  return tokens;
}

motion::MotionSequence ImuTokenizer::decode_tokens(std::span<const vq::Token> tokens, double fps) const {
  if (tokens.empty()) return motion::MotionSequence{fps, {}};
  const Tensor rows = Tensor::from({tokens.size(), codebook_.dim()}, vq::lookup(codebook_, tokens));
  return motion_from_tensor(decode(g::from_rows(rows, 1)), 0, fps);
}

std::vector<NamedParam> ImuTokenizer::parameters() const {
  std::vector<NamedParam> out;
  encoder_.collect("encoder", out);
  return out;
}

std::vector<NamedParam> ImuTokenizer::decoder_parameters() const {
  std::vector<NamedParam> out;
  decoder_.collect("decoder", out);
  return out;
}

Architecture ImuTokenizer::architecture() const {
  return {ModelKind::kImuTokenizer, il::kWidth, ml::kWidth, shape_.hidden, shape_.latent, codebook_.size()};
}

// ---------------------------------------------------------------------------

BaselinePoser::BaselinePoser(const TrainConfig& cfg, std::uint64_t seed) : shape_(net_shape(cfg)) {
  const Rng root(seed);
  Rng enc_rng = root.split(21), dec_rng = root.split(22);
  encoder_ = g::SequenceEncoder(il::kWidth, shape_, enc_rng);
  decoder_ = g::SequenceDecoder(ml::kWidth, shape_, dec_rng);
}

Tensor BaselinePoser::forward(const Tensor& imu) const {
  return apply_contact_sigmoid(decoder_.forward(encoder_.forward(imu)));
}

motion::MotionSequence BaselinePoser::predict(const imu::InertiaSequence& raw) const {
  return predict_normalized(imu::normalize_acceleration(raw, require_stats(stats_)));
}

motion::MotionSequence BaselinePoser::predict_normalized(const imu::InertiaSequence& normalized) const {
  return motion_from_tensor(forward(imu_tensor(truncated(normalized))), 0, normalized.fps);
}

std::vector<NamedParam> BaselinePoser::parameters() const {
  std::vector<NamedParam> out;
  encoder_.collect("encoder", out);
  decoder_.collect("decoder", out);
  return out;
}

Architecture BaselinePoser::architecture() const {
  return {ModelKind::kBaselinePoser, il::kWidth, ml::kWidth, shape_.hidden, shape_.latent, 0};
}

}  // namespace jrtok::model
