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

#include "jrtok/gradnet/optim.hpp"

#include <cmath>
#include <numbers>

#include "jrtok/error.hpp"

namespace jrtok::gradnet {

void adamw_update(std::span<double> param, std::span<const double> grad, std::span<double> first_moment,
                  std::span<double> second_moment, std::int64_t step, double lr, const AdamWConfig& cfg) {
  const std::size_t n = param.size();
  if (grad.size() != n || first_moment.size() != n || second_moment.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "adamw_update: parameter/gradient/moment sizes differ");
  }
  if (step < 1) throw Error(ErrorCode::kInvalidArgument, "adamw_update: step must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const double decay = 1.0 - lr * cfg.weight_decay;
  for (std::size_t i = 0; i < n; ++i) {
    param[i] *= decay;
    const double g = grad[i];
    first_moment[i] = cfg.beta1 * first_moment[i] + (1.0 - cfg.beta1) * g;
    second_moment[i] = cfg.beta2 * second_moment[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = first_moment[i] / bc1;
    const double v_hat = second_moment[i] / bc2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

AdamW::AdamW(std::vector<NamedParam> params, AdamWConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (const NamedParam& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void AdamW::step(double lr) {
  ++step_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& t = params_[i].tensor;
    const std::vector<double> g = t.grad_or_zeros();
    adamw_update(t.mutable_values(), g, m_[i], v_[i], step_, lr, cfg_);
  }
  zero_grad();
}

void AdamW::zero_grad() {
  for (NamedParam& p : params_) p.tensor.zero_grad();
}

double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr_max, double lr_min) {
  if (total_steps <= 0 || step < 0 || step > total_steps) {
    throw Error(ErrorCode::kOutOfRange, "cosine_lr: step outside [0, total_steps]");
  }
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace jrtok::gradnet
