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
#include <string>
#include <string_view>

#include "jrtok/vqcodec.hpp"

namespace jrtok {

/// Every training hyperparameter. Defaults are the desk-scale setup; the
/// large setup is K = 1024, latent = 512, batch_size = 512.
struct TrainConfig {
  std::size_t codebook_size = 64;  // K
  std::size_t latent_dim = 64;     // d_z
  std::size_t hidden = 128;
  std::size_t compression = 4;     // l
  double gamma = 0.99;
  vq::LossWeights weights;
  double lr_max = 2e-4;
  double lr_min = 2e-6;
  double weight_decay = 0.01;
  std::size_t batch_size = 16;
  std::int64_t total_steps = 5000;
  std::size_t window = 64;  // T
  std::uint64_t seed = 0;
  double fps = 60.0;
  double gumbel_temperature = vq::kGumbelTemperature;
  double zipf_alpha = 1.0;
  double zipf_beta = 2.7;
  // synthetic corpus
  std::size_t corpus_sequences = 32;
  double corpus_duration = 8.0;  // s
  std::int64_t log_every = 50;

  /// Throws ConfigInvalid.
  void validate() const;

  /// Flat "key = value" text, '#' starts a comment. Unknown keys and
  /// malformed values throw ConfigInvalid.
  static TrainConfig parse(std::string_view text);
  static TrainConfig load(const std::string& path);
  /// Canonical sorted key=value text; parse(to_text()) round-trips.
  std::string to_text() const;
};

}  // namespace jrtok
