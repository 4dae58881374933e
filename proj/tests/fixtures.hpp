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

#include "jrtok/config.hpp"
#include "jrtok/trainer.hpp"

namespace testutil {

/// Small network so model-level tests run in milliseconds.
inline jrtok::TrainConfig tiny_config() {
  jrtok::TrainConfig c;
  c.codebook_size = 8;
  c.latent_dim = 8;
  c.hidden = 16;
  c.window = 16;
  c.batch_size = 4;
  c.total_steps = 20;
  c.seed = 7;
  return c;
}

inline const jrtok::train::PairedCorpus& tiny_corpus() {
  static const jrtok::train::PairedCorpus corpus = jrtok::train::synthetic_corpus(4, 1.0, 60.0, 11);
  return corpus;
}

}  // namespace testutil
