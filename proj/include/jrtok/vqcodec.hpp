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

#include <cstdint>
#include <span>
#include <vector>

#include "jrtok/digest.hpp"
#include "jrtok/gradnet/tensor.hpp"
#include "jrtok/rng.hpp"

namespace jrtok::vq {

using gradnet::Tensor;
using Token = std::uint32_t;

/// K x dim code table whose entries are re-estimated by exponential moving
/// averages: entry_k = sigma_k / delta_k.
class Codebook {
 public:
  Codebook() = default;
  /// Entries ~ U(-1/K, 1/K): the untrained state.
  Codebook(std::size_t size, std::size_t dim, double gamma, Rng& rng);

  std::size_t size() const { return size_; }
  std::size_t dim() const { return dim_; }
  double gamma() const { return gamma_; }

  std::span<const double> entries() const { return entries_; }
  std::span<const double> entry(std::size_t k) const { return std::span(entries_).subspan(k * dim_, dim_); }
  std::span<const double> ema_sigma() const { return sigma_; }
  std::span<const double> ema_delta() const { return delta_; }
  std::span<const std::uint32_t> dead_streak() const { return dead_streak_; }

  /// Replaces the entries and reseeds the accumulators to
  /// (sigma, delta) = (mass * entry, mass).
  void reset_entries(std::span<const double> entries, double mass = kInitialMass);
  void reset_entry(std::size_t k, std::span<const double> value, double mass = kInitialMass);

  /// Restores a full state (checkpoint loading). Throws ShapeMismatch.
  void restore(std::size_t size, std::size_t dim, double gamma, std::vector<double> entries, std::vector<double> sigma,
               std::vector<double> delta, std::vector<std::uint32_t> dead_streak);

  /// [K, dim] tensor copy of the entries.
  Tensor entries_tensor(bool requires_grad = false) const;

  /// SHA-256 over (K, dim, entries); identifies the token vocabulary.
  Digest digest() const;

  static constexpr double kInitialMass = 1e-3;

 private:
  friend void ema_update(Codebook&, std::span<const double>, std::span<const Token>);
  friend std::size_t reinit_dead_codes(Codebook&, std::span<const double>, Rng&);

  std::size_t size_ = 0;
  std::size_t dim_ = 0;
  double gamma_ = 0.99;
  std::vector<double> entries_;
  std::vector<double> sigma_;
  std::vector<double> delta_;
  std::vector<std::uint32_t> dead_streak_;
};

struct Quantized {
  std::vector<Token> indices;
  /// indices.size() x dim gathered entries.
  std::vector<double> codes;
};

/// Nearest entry by squared Euclidean distance per latent row (rows x dim,
/// row-major); ties go to the lowest index. Throws ShapeMismatch.
Quantized quantize(std::span<const double> latents, const Codebook& cb);

/// Gathers entries for the given tokens. Throws OutOfRange.
std::vector<double> lookup(const Codebook& cb, std::span<const Token> tokens);

/// sigma_k <- g sigma_k + (1 - g) sum_{s->k} z_s; delta_k <- g delta_k +
/// (1 - g) count_k; entry_k <- sigma_k / delta_k.
void ema_update(Codebook& cb, std::span<const double> latents, std::span<const Token> indices);

/// Lloyd iterations seeded from distinct latent rows; sets the entries.
void kmeans_init(Codebook& cb, std::span<const double> latents, Rng& rng, int iterations = 10);

/// Entries whose delta stayed below 1e-3 of the uniform share (rows / K) for
/// kDeadPatience consecutive calls are moved onto random latent rows.
/// Returns the number of entries reinitialized.
std::size_t reinit_dead_codes(Codebook& cb, std::span<const double> latents, Rng& rng);

inline constexpr double kDeadFraction = 1e-3;
inline constexpr std::uint32_t kDeadPatience = 50;

/// exp(entropy) of the hard-assignment histogram.
double perplexity(std::span<const Token> indices, std::size_t codebook_size);
/// Hard-assignment histogram, normalized and sorted descending.
std::vector<double> sorted_histogram(std::span<const Token> indices, std::size_t codebook_size);

inline constexpr double kGumbelTemperature = 0.5;

/// Soft batch usage of the codebook: per latent row, softmax((-||z - c_k||^2
/// + g_k) / temperature) with Gumbel noise g drawn from `noise` (zero when
/// null), averaged over rows and sorted descending. The sort permutation
/// comes from the forward values and is constant in the backward pass.
Tensor batch_token_frequency(const Tensor& latent_rows, const Tensor& codes, double temperature, Rng* noise);

struct ZipfParams {
  double alpha = 1.0;
  double beta = 2.7;
  std::size_t size = 64;
};

/// p_k proportional to 1 / (k + beta)^alpha for k = 1..K.
std::vector<double> zipf_target(const ZipfParams& params);

/// Plain-value Jensen-Shannon divergence (nats). Throws LengthMismatch.
double js_divergence(std::span<const double> p, std::span<const double> q);

struct LossWeights {
  double recon = 1.0;
  double commit = 0.02;
  double contact = 0.01;
  double slide = 0.01;
  double code = 1.0;
  double dist = 1.0;
  double zipf = 0.2;
};

struct MotionLosses {
  Tensor total;
  double recon = 0.0;
  double commit = 0.0;
  double contact = 0.0;
  double slide = 0.0;
};

/// Motion VQ-VAE objective. target / recon are [B, 271, T'] with contact
/// probabilities in the last four channels of recon; latents / codes are the
/// [B*S, dim] rows before and after quantization.
MotionLosses motion_vq_losses(const Tensor& target, const Tensor& recon, const Tensor& latents, const Tensor& codes,
                              const LossWeights& w);

struct ImuLosses {
  Tensor total;
  double code = 0.0;
  double dist = 0.0;
  double js_imu_motion = 0.0;
  double js_motion_zipf = 0.0;
};

/// IMU tokenizer objective. The code term passes through imu_codes to
/// imu_latents; motion-side inputs are treated as constants.
ImuLosses imu_tokenizer_losses(const Tensor& imu_latents, const Tensor& imu_codes, const Tensor& motion_codes,
                               const Tensor& imu_frequency, const Tensor& motion_frequency,
                               std::span<const double> zipf, const LossWeights& w);

}  // namespace jrtok::vq
