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

#include <cstddef>
#include <span>
#include <vector>

#include "jrtok/gradnet/tensor.hpp"

// Differentiable operations. Sequence tensors are laid out [batch, channels,
// time]; row tensors are [rows, features].
namespace jrtok::gradnet {

/// Cross-correlation. x [B, Cin, T], weight [Cout, Cin, K], bias [Cout].
/// Output length floor((T + 2 * padding - K) / stride) + 1.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride, std::size_t padding);

/// x [N, In], weight [Out, In], bias [Out] -> [N, Out].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Repeats every time step `factor` times.
Tensor upsample_nearest(const Tensor& x, std::size_t factor);

Tensor leaky_relu(const Tensor& x, double slope = 0.2);
Tensor sigmoid(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

/// Scalar reductions, shape [1].
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum_squares(const Tensor& x);
/// Weighted sum of scalar tensors.
Tensor weighted_sum(std::span<const Tensor> scalars, std::span<const double> weights);

/// Mean of (a - b)^2 over all elements.
Tensor mse(const Tensor& a, const Tensor& b);

/// Sum of elementwise binary cross-entropy. prediction is clamped to
/// [eps, 1 - eps]; target is treated as a constant.
Tensor bce_sum(const Tensor& prediction, const Tensor& target, double eps = 1e-7);

/// Value of x, zero gradient.
Tensor stop_gradient(const Tensor& x);

/// Forward value is `codes`; the backward pass hands the incoming gradient
/// to `latents` unchanged and nothing to `codes`.
Tensor straight_through(const Tensor& latents, const Tensor& codes);

/// [B, C, T] -> [B * T, C]
Tensor to_rows(const Tensor& x);
/// [B * T, C] -> [B, C, T]
Tensor from_rows(const Tensor& rows, std::size_t batch);

/// [B, C, T] -> [B, count, T]
Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t count);
Tensor concat_channels(std::span<const Tensor> parts);
/// [B, C, T] -> [B, 1, T]
Tensor sum_channels(const Tensor& x);
/// [B, C, T] -> [B, C, length] starting at time `begin`.
Tensor slice_time(const Tensor& x, std::size_t begin, std::size_t length);

/// rows [N, D], codes [K, D] -> [N, K] with entry ||rows_n - codes_k||^2.
Tensor squared_distances(const Tensor& rows, const Tensor& codes);
/// Row-wise softmax of x / temperature.
Tensor softmax_rows(const Tensor& x, double temperature);
/// [N, K] -> [K]
Tensor mean_rows(const Tensor& x);
/// out[i] = v[index[i]]
Tensor gather(const Tensor& v, std::span<const std::size_t> index);

/// Jensen-Shannon divergence in nats between two distributions of equal
/// length. Entries are floored at eps and renormalized first.
Tensor js_divergence(const Tensor& p, const Tensor& q, double eps = 1e-12);

}  // namespace jrtok::gradnet
