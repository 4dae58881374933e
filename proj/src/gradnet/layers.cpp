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

#include "jrtok/gradnet/layers.hpp"

#include <cmath>

#include "jrtok/error.hpp"
#include "jrtok/gradnet/ops.hpp"

namespace jrtok::gradnet {

Conv1dLayer::Conv1dLayer(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size,
                         std::size_t stride, std::size_t padding, Rng& rng)
    : stride_(stride), padding_(padding) {
  if (stride == 0) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * kernel_size));
  std::vector<double> w(out_channels * in_channels * kernel_size);
  for (double& v : w) v = rng.uniform(-bound, bound);
  std::vector<double> b(out_channels);
  for (double& v : b) v = rng.uniform(-bound, bound);
  weight_ = Tensor::from({out_channels, in_channels, kernel_size}, std::move(w), true);
  bias_ = Tensor::from({out_channels}, std::move(b), true);
}

Tensor Conv1dLayer::forward(const Tensor& x) const { return conv1d(x, weight_, bias_, stride_, padding_); }

void Conv1dLayer::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
  out.push_back({prefix + ".weight", weight_});
  out.push_back({prefix + ".bias", bias_});
}

SequenceEncoder::SequenceEncoder(std::size_t in_channels, const NetShape& shape, Rng& rng) : slope_(shape.slope) {
  layers_.emplace_back(in_channels, shape.hidden, 4, 2, 1, rng);
  layers_.emplace_back(shape.hidden, shape.hidden, 4, 2, 1, rng);
  layers_.emplace_back(shape.hidden, shape.hidden, 3, 1, 1, rng);
  layers_.emplace_back(shape.hidden, shape.latent, 1, 1, 0, rng);
}

Tensor SequenceEncoder::forward(const Tensor& x) const {
  if (x.rank() != 3 || x.dim(2) % kDownsample != 0) {
    throw Error(ErrorCode::kShapeMismatch, "encoder input length must be a multiple of 4, got " +
                                               shape_string(x.shape()));
  }
  Tensor h = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = leaky_relu(layers_[i].forward(h), slope_);
  return layers_.back().forward(h);
}

void SequenceEncoder::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect(prefix + ".conv" + std::to_string(i), out);
}

SequenceDecoder::SequenceDecoder(std::size_t out_channels, const NetShape& shape, Rng& rng) : slope_(shape.slope) {
  layers_.emplace_back(shape.latent, shape.hidden, 3, 1, 1, rng);
  layers_.emplace_back(shape.hidden, shape.hidden, 3, 1, 1, rng);
  layers_.emplace_back(shape.hidden, shape.hidden, 3, 1, 1, rng);
  layers_.emplace_back(shape.hidden, out_channels, 1, 1, 0, rng);
}

Tensor SequenceDecoder::forward(const Tensor& z) const {
  Tensor h = leaky_relu(layers_[0].forward(z), slope_);
  h = leaky_relu(layers_[1].forward(upsample_nearest(h, 2)), slope_);
  h = leaky_relu(layers_[2].forward(upsample_nearest(h, 2)), slope_);
  return layers_[3].forward(h);
}

void SequenceDecoder::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect(prefix + ".conv" + std::to_string(i), out);
}

}  // namespace jrtok::gradnet
