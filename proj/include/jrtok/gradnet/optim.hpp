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

#include "jrtok/gradnet/layers.hpp"

namespace jrtok::gradnet {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// One decoupled-weight-decay Adam update of a flat parameter block.
/// `step` is the 1-based count including this update. Throws ShapeMismatch
/// when the spans differ in length.
void adamw_update(std::span<double> param, std::span<const double> grad, std::span<double> first_moment,
                  std::span<double> second_moment, std::int64_t step, double lr, const AdamWConfig& cfg);

/// Moments for an ordered parameter list.
class AdamW {
 public:
  AdamW() = default;
  AdamW(std::vector<NamedParam> params, AdamWConfig cfg);

  /// Applies one update from the parameters' accumulated gradients, then
  /// clears them. Missing gradients count as zero.
  void step(double lr);
  void zero_grad();

  std::int64_t step_count() const { return step_; }
  const std::vector<NamedParam>& params() const { return params_; }
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  void set_step_count(std::int64_t s) { step_ = s; }

 private:
  std::vector<NamedParam> params_;
  AdamWConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t step_ = 0;
};

/// lr_min + (lr_max - lr_min) (1 + cos(pi step / total)) / 2. Throws
/// OutOfRange unless 0 <= step <= total.
double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr_max, double lr_min);

}  // namespace jrtok::gradnet
