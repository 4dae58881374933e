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

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "jrtok/checkpoint.hpp"
#include "jrtok/config.hpp"
#include "jrtok/gradnet/optim.hpp"
#include "jrtok/imusim.hpp"
#include "jrtok/models.hpp"
#include "jrtok/motion.hpp"

namespace jrtok::train {

using gradnet::Tensor;

/// Frame-aligned motion and IMU recordings. The IMU side carries simulated
/// drift and is not normalized.
struct PairedCorpus {
  std::vector<std::string> ids;
  std::vector<motion::MotionSequence> motion;
  std::vector<imu::InertiaSequence> imu;

  std::size_t size() const { return motion.size(); }
};

/// Sequence i uses style i % 4 and seeds derived from (seed, i).
PairedCorpus synthetic_corpus(std::size_t count, double duration_s, double fps, std::uint64_t seed);

/// Seed offset for held-out evaluation corpora, disjoint from training seeds.
inline constexpr std::uint64_t kHeldOutSeed = 0x5eed0000a11ceULL;

struct WindowRef {
  std::size_t sequence = 0;
  std::size_t start = 0;
};

/// Crops of window frames at stride window / 2 (shorter sequences are skipped).
std::vector<WindowRef> make_windows(std::span<const std::size_t> lengths, std::size_t window);

/// Frames [start, start + length) with the root's horizontal (x, z)
/// position expressed relative to the first frame; height is kept.
motion::MotionSequence canonical_window(const motion::MotionSequence& seq, std::size_t start, std::size_t length);

/// [B, 271, T] batch of canonical windows.
Tensor motion_batch(std::span<const motion::MotionSequence> corpus, std::span<const WindowRef> windows,
                    std::span<const std::size_t> pick, std::size_t length);
/// [B, 72, T] batch; the IMU is used as given.
Tensor imu_batch(std::span<const imu::InertiaSequence> corpus, std::span<const WindowRef> windows,
                 std::span<const std::size_t> pick, std::size_t length);

/// Seeded shuffled epochs over window indices; batches continue across
/// epoch boundaries so every batch is full.
class BatchSampler {
 public:
  BatchSampler() = default;
  BatchSampler(std::size_t windows, std::size_t batch_size, std::uint64_t seed);

  std::vector<std::size_t> next();

 private:
  void reshuffle();

  std::size_t windows_ = 0;
  std::size_t batch_size_ = 1;
  std::uint64_t seed_ = 0;
  std::uint64_t epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> order_;
};

struct StepRecord {
  std::int64_t step = 0;
  double lr = 0.0;
  double wall_seconds = 0.0;
  /// Loss components and diagnostics, in logging order. "total" is first.
  std::vector<std::pair<std::string, double>> scalars;

  /// Throws OutOfRange for an unknown name.
  double get(std::string_view name) const;
  /// One JSON object: stage, step, lr, wall_s, then the scalars.
  std::string to_json(std::string_view stage) const;
};

struct TrainReport {
  std::string stage;
  std::vector<StepRecord> steps;

  void write_jsonl(std::ostream& out) const;
};

using StepCallback = std::function<void(const StepRecord&)>;

/// Stage 1: encoder -> quantize -> straight-through -> decoder, AdamW with a
/// cosine schedule, EMA codebook, k-means initialization on the first batch.
class MotionTrainer {
 public:
  /// Throws ConfigInvalid, EmptyDataset.
  MotionTrainer(const TrainConfig& cfg, std::vector<motion::MotionSequence> corpus);

  /// Loss of the current model on the batch the next step() will use; no
  /// state changes.
  StepRecord evaluate_next() const;
  StepRecord step();
  void run(const StepCallback& on_step = {});

  std::int64_t step_count() const { return optimizer_.step_count(); }
  const model::MotionVqVae& model() const { return model_; }
  const TrainReport& report() const { return report_; }
  ckpt::MotionCheckpoint checkpoint() const;

 private:
  struct Pass {
    StepRecord record;
    Tensor total;
    Tensor rows;
    std::vector<vq::Token> tokens;
  };
  Pass forward(std::span<const std::size_t> pick, Rng& gumbel) const;

  TrainConfig cfg_;
  std::vector<motion::MotionSequence> corpus_;
  std::vector<WindowRef> windows_;
  model::MotionVqVae model_;
  gradnet::AdamW optimizer_;
  BatchSampler sampler_;
  Rng reinit_rng_{0};
  Rng gumbel_rng_{0};
  std::vector<double> zipf_;
  TrainReport report_;
  std::chrono::steady_clock::time_point start_;
};

/// Stage 2: IMU encoder trained against a frozen copy of the motion model.
/// The IMU codebook starts from the motion codebook entries.
class ImuTrainer {
 public:
  /// Throws CheckpointMismatch (latent size, codebook size or width differ),
  /// EmptyDataset, ConfigInvalid.
  ImuTrainer(const TrainConfig& cfg, PairedCorpus corpus, const ckpt::MotionCheckpoint& motion);

  StepRecord evaluate_next() const;
  StepRecord step();
  void run(const StepCallback& on_step = {});

  std::int64_t step_count() const { return optimizer_.step_count(); }
  const model::ImuTokenizer& model() const { return model_; }
  const model::MotionVqVae& motion_model() const { return motion_.model; }
  const TrainReport& report() const { return report_; }
  ckpt::ImuCheckpoint checkpoint() const;

 private:
  struct Pass {
    StepRecord record;
    Tensor total;
    Tensor rows;
    std::vector<vq::Token> tokens;
  };
  Pass forward(std::span<const std::size_t> pick, Rng& gumbel) const;

  TrainConfig cfg_;
  PairedCorpus corpus_;
  std::vector<imu::InertiaSequence> normalized_;
  std::vector<WindowRef> windows_;
  ckpt::MotionCheckpoint motion_;
  model::ImuTokenizer model_;
  gradnet::AdamW optimizer_;
  BatchSampler sampler_;
  Rng reinit_rng_{0};
  Rng gumbel_rng_{0};
  std::vector<double> zipf_;
  TrainReport report_;
  std::chrono::steady_clock::time_point start_;
};

/// Continuous IMU -> motion regressor trained with the reconstruction term only.
class BaselineTrainer {
 public:
  BaselineTrainer(const TrainConfig& cfg, PairedCorpus corpus);

  StepRecord evaluate_next() const;
  StepRecord step();
  void run(const StepCallback& on_step = {});

  std::int64_t step_count() const { return optimizer_.step_count(); }
  const model::BaselinePoser& model() const { return model_; }
  const TrainReport& report() const { return report_; }
  ckpt::BaselineCheckpoint checkpoint() const;

 private:
  struct Pass {
    StepRecord record;
    Tensor total;
  };
  Pass forward(std::span<const std::size_t> pick) const;

  TrainConfig cfg_;
  PairedCorpus corpus_;
  std::vector<imu::InertiaSequence> normalized_;
  std::vector<WindowRef> windows_;
  model::BaselinePoser model_;
  gradnet::AdamW optimizer_;
  BatchSampler sampler_;
  TrainReport report_;
  std::chrono::steady_clock::time_point start_;
};

/// Soft batch token usage of a motion batch under the model (no Gumbel noise).
std::vector<double> motion_frequency(const model::MotionVqVae& model, const Tensor& batch, double temperature);
/// Same for a normalized IMU batch.
std::vector<double> imu_frequency(const model::ImuTokenizer& model, const Tensor& batch, double temperature);

std::pair<ckpt::MotionCheckpoint, TrainReport> train_motion_vqvae(std::vector<motion::MotionSequence> corpus,
                                                                  const TrainConfig& cfg,
                                                                  const StepCallback& on_step = {});
std::pair<ckpt::ImuCheckpoint, TrainReport> train_imu_tokenizer(PairedCorpus corpus,
                                                                 const ckpt::MotionCheckpoint& motion,
                                                                 const TrainConfig& cfg,
                                                                 const StepCallback& on_step = {});
std::pair<ckpt::BaselineCheckpoint, TrainReport> train_baseline(PairedCorpus corpus, const TrainConfig& cfg,
                                                                const StepCallback& on_step = {});

}  // namespace jrtok::train
