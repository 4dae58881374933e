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

#include "jrtok/vqcodec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "jrtok/error.hpp"
#include "jrtok/gradnet/ops.hpp"
#include "jrtok/motion.hpp"

namespace jrtok::vq {

namespace g = gradnet;

Codebook::Codebook(std::size_t size, std::size_t dim, double gamma, Rng& rng)
    : size_(size), dim_(dim), gamma_(gamma) {
  if (size < 2) throw Error(ErrorCode::kInvalidArgument, "codebook needs at least 2 entries");
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "codebook dimension must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::kInvalidArgument, "EMA gamma must lie in (0, 1)");
  std::vector<double> init(size * dim);
  const double bound = 1.0 / static_cast<double>(size);
  for (double& v : init) v = rng.uniform(-bound, bound);
  reset_entries(init);
}

void Codebook::reset_entries(std::span<const double> entries, double mass) {
  if (entries.size() != size_ * dim_) throw Error(ErrorCode::kShapeMismatch, "codebook entry count mismatch");
  entries_.assign(entries.begin(), entries.end());
  sigma_.resize(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) sigma_[i] = mass * entries_[i];
  delta_.assign(size_, mass);
  dead_streak_.assign(size_, 0);
}

void Codebook::reset_entry(std::size_t k, std::span<const double> value, double mass) {
  if (k >= size_ || value.size() != dim_) throw Error(ErrorCode::kShapeMismatch, "reset_entry: bad index or width");
  for (std::size_t d = 0; d < dim_; ++d) {
    entries_[k * dim_ + d] = value[d];
    sigma_[k * dim_ + d] = mass * value[d];
  }
  delta_[k] = mass;
  dead_streak_[k] = 0;
}

void Codebook::restore(std::size_t size, std::size_t dim, double gamma, std::vector<double> entries,
                       std::vector<double> sigma, std::vector<double> delta, std::vector<std::uint32_t> dead_streak) {
  if (entries.size() != size * dim || sigma.size() != size * dim || delta.size() != size ||
      dead_streak.size() != size) {
    throw Error(ErrorCode::kShapeMismatch, "codebook restore: inconsistent sizes");
  }
  size_ = size;
  dim_ = dim;
  gamma_ = gamma;
  entries_ = std::move(entries);
  sigma_ = std::move(sigma);
  delta_ = std::move(delta);
  dead_streak_ = std::move(dead_streak);
}

Tensor Codebook::entries_tensor(bool requires_grad) const {
  return Tensor::from({size_, dim_}, entries_, requires_grad);
}

Digest Codebook::digest() const {
  static_assert(std::endian::native == std::endian::little, "digest assumes a little-endian host");
  std::vector<std::uint8_t> bytes(16 + entries_.size() * sizeof(double));
  const std::uint64_t header[2] = {size_, dim_};
  std::memcpy(bytes.data(), header, 16);
  std::memcpy(bytes.data() + 16, entries_.data(), entries_.size() * sizeof(double));
  return sha256(bytes);
}

Quantized quantize(std::span<const double> latents, const Codebook& cb) {
  const std::size_t dim = cb.dim();
  if (dim == 0 || latents.size() % dim != 0) throw Error(ErrorCode::kShapeMismatch, "latent width != codebook dim");
  const std::size_t rows = latents.size() / dim;
  const auto entries = cb.entries();
  Quantized q;
  q.indices.resize(rows);
  q.codes.resize(rows * dim);
  for (std::size_t n = 0; n < rows; ++n) {
    const double* z = latents.data() + n * dim;
    Token best = 0;
    double best_d = 0.0;
    for (std::size_t k = 0; k < cb.size(); ++k) {
      const double* c = entries.data() + k * dim;
      double d = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double diff = z[i] - c[i];
        d += diff * diff;
      }
      if (k == 0 || d < best_d) {
        best_d = d;
        best = static_cast<Token>(k);
      }
    }
    q.indices[n] = best;
    std::copy_n(entries.begin() + best * dim, dim, q.codes.begin() + n * dim);
  }
  return q;
}

std::vector<double> lookup(const Codebook& cb, std::span<const Token> tokens) {
  std::vector<double> out(tokens.size() * cb.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= cb.size()) throw Error(ErrorCode::kOutOfRange, "token id exceeds codebook size");
    const auto e = cb.entry(tokens[i]);
    std::copy(e.begin(), e.end(), out.begin() + i * cb.dim());
  }
  return out;
}

void ema_update(Codebook& cb, std::span<const double> latents, std::span<const Token> indices) {
  const std::size_t dim = cb.dim_, k_size = cb.size_;
  if (latents.size() != indices.size() * dim) throw Error(ErrorCode::kShapeMismatch, "ema_update: size mismatch");
  std::vector<double> sums(k_size * dim, 0.0);
  std::vector<double> counts(k_size, 0.0);
  for (std::size_t n = 0; n < indices.size(); ++n) {
    const Token k = indices[n];
    if (k >= k_size) throw Error(ErrorCode::kOutOfRange, "ema_update: index out of range");
    counts[k] += 1.0;
    for (std::size_t d = 0; d < dim; ++d) sums[k * dim + d] += latents[n * dim + d];
  }
  const double gamma = cb.gamma_;
  for (std::size_t k = 0; k < k_size; ++k) {
    cb.delta_[k] = gamma * cb.delta_[k] + (1.0 - gamma) * counts[k];
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t i = k * dim + d;
      cb.sigma_[i] = gamma * cb.sigma_[i] + (1.0 - gamma) * sums[i];
      cb.entries_[i] = cb.sigma_[i] / cb.delta_[k];
    }
  }
}

void kmeans_init(Codebook& cb, std::span<const double> latents, Rng& rng, int iterations) {
  const std::size_t dim = cb.dim(), k_size = cb.size();
  if (latents.empty() || latents.size() % dim != 0) throw Error(ErrorCode::kShapeMismatch, "kmeans_init: bad latents");
  const std::size_t rows = latents.size() / dim;
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  std::vector<double> centers(k_size * dim);
  for (std::size_t k = 0; k < k_size; ++k) {
    const std::size_t src = order[k % rows];
    std::copy_n(latents.begin() + src * dim, dim, centers.begin() + k * dim);
  }
  cb.reset_entries(centers);
  for (int it = 0; it < iterations; ++it) {
    const Quantized q = quantize(latents, cb);
    std::vector<double> sums(k_size * dim, 0.0);
    std::vector<std::size_t> counts(k_size, 0);
    for (std::size_t n = 0; n < rows; ++n) {
      ++counts[q.indices[n]];
      for (std::size_t d = 0; d < dim; ++d) sums[q.indices[n] * dim + d] += latents[n * dim + d];
    }
    for (std::size_t k = 0; k < k_size; ++k) {
      if (counts[k] == 0) continue;  // empty cluster keeps its center
      for (std::size_t d = 0; d < dim; ++d) centers[k * dim + d] = sums[k * dim + d] / static_cast<double>(counts[k]);
    }
    cb.reset_entries(centers);
  }
}

std::size_t reinit_dead_codes(Codebook& cb, std::span<const double> latents, Rng& rng) {
  const std::size_t dim = cb.dim_;
  const std::size_t rows = latents.size() / dim;
  if (rows == 0) return 0;
  const double threshold = kDeadFraction * static_cast<double>(rows) / static_cast<double>(cb.size_);
  std::size_t revived = 0;
  for (std::size_t k = 0; k < cb.size_; ++k) {
    if (cb.delta_[k] < threshold) {
      ++cb.dead_streak_[k];
    } else {
      cb.dead_streak_[k] = 0;
    }
    if (cb.dead_streak_[k] >= kDeadPatience) {
      const std::size_t src = rng.index(rows);
      cb.reset_entry(k, latents.subspan(src * dim, dim));
      ++revived;
    }
  }
  return revived;
}

double perplexity(std::span<const Token> indices, std::size_t codebook_size) {
  const std::vector<double> f = sorted_histogram(indices, codebook_size);
  double h = 0.0;
  for (double p : f) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

std::vector<double> sorted_histogram(std::span<const Token> indices, std::size_t codebook_size) {
  std::vector<double> f(codebook_size, 0.0);
  if (indices.empty()) return f;
  for (Token t : indices) f.at(t) += 1.0;
  for (double& v : f) v /= static_cast<double>(indices.size());
  std::stable_sort(f.begin(), f.end(), std::greater<>());
  return f;
}

Tensor batch_token_frequency(const Tensor& latent_rows, const Tensor& codes, double temperature, Rng* noise) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  Tensor logits = g::scale(g::squared_distances(latent_rows, codes), -1.0);
  if (noise != nullptr) {
    std::vector<double> gumbel(logits.numel());
    for (double& v : gumbel) v = noise->gumbel();
    logits = g::add(logits, Tensor::from(logits.shape(), std::move(gumbel)));
  }
  const Tensor freq = g::mean_rows(g::softmax_rows(logits, temperature));
  std::vector<std::size_t> order(freq.numel());
  std::iota(order.begin(), order.end(), 0);
  const auto fv = freq.values();
  std::stable_sort(order.begin(), order.end(), [&fv](std::size_t a, std::size_t b) { return fv[a] > fv[b]; });
  return g::gather(freq, order);
}

std::vector<double> zipf_target(const ZipfParams& params) {
  if (!(params.alpha >= 0.0) || !(params.beta > -1.0) || params.size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid Zipf parameters");
  }
  std::vector<double> p(params.size);
  double total = 0.0;
  for (std::size_t k = 0; k < params.size; ++k) {
    p[k] = std::pow(static_cast<double>(k + 1) + params.beta, -params.alpha);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::kLengthMismatch, "js_divergence: length mismatch");
  const Tensor tp = Tensor::from({p.size()}, std::vector<double>(p.begin(), p.end()));
  const Tensor tq = Tensor::from({q.size()}, std::vector<double>(q.begin(), q.end()));
  return g::js_divergence(tp, tq).item();
}

MotionLosses motion_vq_losses(const Tensor& target, const Tensor& recon, const Tensor& latents, const Tensor& codes,
                              const LossWeights& w) {
  namespace ml = motion::layout;
  if (target.shape() != recon.shape() || target.rank() != 3 || target.dim(1) != ml::kWidth) {
    throw Error(ErrorCode::kShapeMismatch, "motion loss expects matching [B, 271, T] tensors");
  }
  if (latents.shape() != codes.shape()) throw Error(ErrorCode::kShapeMismatch, "latents/codes shape mismatch");
  const double frames = static_cast<double>(target.dim(0) * target.dim(2));
  const double rows = static_cast<double>(latents.dim(0));

  const Tensor recon_loss = g::mse(recon, target);
  const Tensor commit = g::scale(g::sum_squares(g::sub(latents, g::stop_gradient(codes))), 1.0 / rows);

  const Tensor p_hat = g::slice_channels(recon, ml::kContact, motion::kFootCount);
  const Tensor p = g::slice_channels(target, ml::kContact, motion::kFootCount);
  const Tensor contact = g::scale(g::bce_sum(p_hat, p), 1.0 / frames);

  const auto& feet = motion::Skeleton::standard().foot_joints;
  std::vector<Tensor> slide_terms;
  for (int i = 0; i < motion::kFootCount; ++i) {
    const std::size_t at = ml::kJointVel + 3 * static_cast<std::size_t>(feet[i] - 1);
    const Tensor v = g::slice_channels(recon, at, 3);
    const Tensor speed_sq = g::sum_channels(g::mul(v, v));
    slide_terms.push_back(g::sum(g::mul(g::slice_channels(p_hat, i, 1), speed_sq)));
  }
  const std::vector<double> ones(slide_terms.size(), 1.0 / frames);
  const Tensor slide = g::weighted_sum(slide_terms, ones);

  MotionLosses out;
  const std::vector<Tensor> parts{recon_loss, commit, contact, slide};
  const std::vector<double> weights{w.recon, w.commit, w.contact, w.slide};
  out.total = g::weighted_sum(parts, weights);
  out.recon = recon_loss.item();
  out.commit = commit.item();
  out.contact = contact.item();
  out.slide = slide.item();
  return out;
}

ImuLosses imu_tokenizer_losses(const Tensor& imu_latents, const Tensor& imu_codes, const Tensor& motion_codes,
                               const Tensor& imu_frequency, const Tensor& motion_frequency,
                               std::span<const double> zipf, const LossWeights& w) {
  if (imu_codes.shape() != motion_codes.shape() || imu_latents.shape() != imu_codes.shape()) {
    throw Error(ErrorCode::kShapeMismatch, "IMU and motion code rows differ in shape");
  }
  if (imu_frequency.numel() != motion_frequency.numel() || zipf.size() != motion_frequency.numel()) {
    throw Error(ErrorCode::kShapeMismatch, "frequency vectors differ in length");
  }
  const double rows = static_cast<double>(imu_codes.dim(0));
  const Tensor passed = g::straight_through(imu_latents, imu_codes);
  const Tensor code = g::scale(g::sum_squares(g::sub(passed, g::stop_gradient(motion_codes))), 1.0 / rows);

  const Tensor f_motion = g::stop_gradient(motion_frequency);
  const Tensor f_zipf = Tensor::from({zipf.size()}, std::vector<double>(zipf.begin(), zipf.end()));
  const Tensor js_im = g::js_divergence(imu_frequency, f_motion);
  const Tensor js_mz = g::js_divergence(f_motion, f_zipf);
  const std::vector<Tensor> dist_parts{js_im, js_mz};
  const std::vector<double> dist_weights{1.0, w.zipf};
  const Tensor dist = g::weighted_sum(dist_parts, dist_weights);

  ImuLosses out;
  const std::vector<Tensor> parts{code, dist};
  const std::vector<double> weights{w.code, w.dist};
  out.total = g::weighted_sum(parts, weights);
  out.code = code.item();
  out.dist = dist.item();
  out.js_imu_motion = js_im.item();
  out.js_motion_zipf = js_mz.item();
  return out;
}

}  // namespace jrtok::vq
