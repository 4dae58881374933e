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
#include <string>
#include <vector>

#include "jrtok/checkpoint.hpp"
#include "jrtok/imusim.hpp"
#include "jrtok/motion.hpp"
#include "jrtok/trainer.hpp"

namespace jrtok::eval {

using geom::Vec3;

/// Mean joint position error in cm between FK of both sequences, each with
/// its own root states. Throws LengthMismatch.
double mpjpe(const motion::MotionSequence& pred, const motion::MotionSequence& gt, const motion::Skeleton& skel);
/// Same on precomputed positions (frames x joints, metres).
double mpjpe(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> gt);

/// Mean norm of the third time derivative of joint positions, in units of
/// 10^2 m/s^3. Central differences inside, one-sided four-point differences
/// at the ends. Throws TooShort below 4 frames.
double jitter(std::span<const std::vector<Vec3>> positions, double fps);
double jitter(const motion::MotionSequence& seq, const motion::Skeleton& skel);

/// Running frame-weighted sums, so averages do not depend on grouping.
struct MetricSums {
  double mpjpe_sum = 0.0;  // cm x frames
  double jitter_sum = 0.0;
  std::size_t frames = 0;

  void add(double mpjpe_cm, double jitter_value, std::size_t n);
  double mpjpe() const;
  double jitter() const;
};

struct LevelMetrics {
  std::string method;
  int noised = 0;  // corrupted sensors; 0 is the clean input
  double mpjpe = 0.0;
  double jitter = 0.0;
  std::size_t cases = 0;

  bool operator==(const LevelMetrics&) const = default;
};

struct MetricReport {
  std::vector<std::string> sequence_ids;
  std::vector<LevelMetrics> rows;
  imu::ChannelSigma noise;
  std::uint64_t seed = 0;

  /// Throws OutOfRange.
  const LevelMetrics& at(std::string_view method, int noised) const;
  bool operator==(const MetricReport&) const;
};

inline constexpr const char* kTokenized = "tokenized";
inline constexpr const char* kBaseline = "baseline";

/// Per-sample Gaussian corruption on a corrupted sensor. Fixed before any
/// training run.
inline constexpr imu::ChannelSigma kBenchmarkNoise{0.1, 2.0, 0.5};

struct BenchmarkOptions {
  std::vector<int> levels{1, 2, 3};
  std::uint64_t seed = 0;
  imu::ChannelSigma noise = kBenchmarkNoise;
  /// Random sensor sets per level above 1; level 1 always uses all six.
  std::size_t combinations = 8;
};

/// The two compared pipelines. Evaluation runs on consecutive T-frame
/// windows of each sequence (remainder dropped), canonicalized like the
/// training windows.
class Benchmark {
 public:
  /// Throws CheckpointMismatch when the IMU tokenizer's decoder differs from
  /// the motion model's, the latent spaces differ, or the baseline's
  /// capacity does not match.
  Benchmark(const ckpt::ImuCheckpoint& imu, const ckpt::MotionCheckpoint& motion,
            const ckpt::BaselineCheckpoint& baseline);

  /// Metrics of both methods on one corruption case (empty sensor list =
  /// clean). Sequences are corrupted with seeds from case_seed, identically
  /// for both methods.
  struct CaseResult {
    MetricSums tokenized;
    MetricSums baseline;
  };
  CaseResult evaluate_case(const train::PairedCorpus& corpus, std::span<const int> sensors,
                           const imu::ChannelSigma& noise, std::uint64_t case_seed) const;

  /// Sensor sets used for a level.
  static std::vector<std::vector<int>> sensor_sets(int level, std::size_t combinations, std::uint64_t seed);

  MetricReport run(const train::PairedCorpus& corpus, const BenchmarkOptions& options) const;

  std::size_t window() const { return window_; }

 private:
  model::ImuTokenizer tokenizer_;
  model::BaselinePoser baseline_;
  std::size_t window_ = 64;
};

/// Seed of case `index` at a noise level, and of the corruption applied to
/// sequence `index` within a case.
std::uint64_t case_seed(std::uint64_t seed, int level, std::size_t index);
std::uint64_t case_sequence_seed(std::uint64_t case_seed, std::size_t index);

MetricReport run_noise_benchmark(const ckpt::ImuCheckpoint& imu, const ckpt::MotionCheckpoint& motion,
                                 const ckpt::BaselineCheckpoint& baseline, const train::PairedCorpus& corpus,
                                 const BenchmarkOptions& options);

/// Held-out benchmark corpus: 16 sequences from the held-out seed space.
train::PairedCorpus heldout_corpus(std::uint64_t seed, std::size_t count = 16, double duration_s = 8.0,
                                   double fps = 60.0);

/// Aligned text table, one row per (method, level).
std::string render_table(const MetricReport& report);
/// Machine-readable record (JSON); parse_record(to_record(r)) == r bitwise.
std::string to_record(const MetricReport& report);
MetricReport parse_record(std::string_view text);

}  // namespace jrtok::eval
