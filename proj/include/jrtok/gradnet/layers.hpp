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

#include <string>
#include <vector>

#include "jrtok/gradnet/tensor.hpp"
#include "jrtok/rng.hpp"

namespace jrtok::gradnet {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

class Conv1dLayer {
 public:
  Conv1dLayer() = default;
  /// Weights and bias ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), fan_in = in * kernel.
  Conv1dLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size, std::size_t stride,
              std::size_t padding, Rng& rng);

  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;

  std::size_t in_channels() const { return weight_.dim(1); }
  std::size_t out_channels() const { return weight_.dim(0); }
  std::size_t kernel_size() const { return weight_.dim(2); }
  std::size_t stride() const { return stride_; }
  std::size_t padding() const { return padding_; }

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }

 private:
  Tensor weight_;
  Tensor bias_;
  std::size_t stride_ = 1;
  std::size_t padding_ = 0;
};

/// Architecture knobs shared by encoders and decoders.
struct NetShape {
  std::size_t hidden = 128;
  std::size_t latent = 64;
  double slope = 0.2;
};

/// in -> conv(k4,s2) -> lrelu -> conv(k4,s2) -> lrelu -> conv(k3) -> lrelu
/// -> conv(k1) to latent. Downsamples time by 4.
class SequenceEncoder {
 public:
  SequenceEncoder() = default;
  SequenceEncoder(std::size_t in_channels, const NetShape& shape, Rng& rng);

  /// [B, in, T] -> [B, latent, T / 4]; T must be a multiple of 4.
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;

  static constexpr std::size_t kDownsample = 4;

 private:
  std::vector<Conv1dLayer> layers_;
  double slope_ = 0.2;
};

/// Mirror of SequenceEncoder: conv(k3) -> lrelu -> [up x2 -> conv(k3) ->
/// lrelu] x 2 -> conv(k1) to out channels.
class SequenceDecoder {
 public:
  SequenceDecoder() = default;
  SequenceDecoder(std::size_t out_channels, const NetShape& shape, Rng& rng);

  /// [B, latent, S] -> [B, out, 4 S]
  Tensor forward(const Tensor& z) const;
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;

 private:
  std::vector<Conv1dLayer> layers_;
  double slope_ = 0.2;
};

}  // namespace jrtok::gradnet
