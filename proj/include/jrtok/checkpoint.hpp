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

#include "jrtok/config.hpp"
#include "jrtok/models.hpp"

namespace jrtok::ckpt {

// "MJC1" layout, little-endian:
//   magic | u32 version | string kind | 32-byte architecture digest |
//   string config text | i64 optimizer step | u32 record count |
//   records (u16 name length, name, u32 rank, u64 dims, f64 values) |
//   32-byte SHA-256 of everything before it.
// Values are stored as float64 so a round trip is bitwise.

inline constexpr std::uint32_t kVersion = 1;

struct TensorRecord {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;

  bool operator==(const TensorRecord&) const = default;
};

/// Raw container; the typed loaders below interpret it.
struct CheckpointData {
  model::ModelKind kind = model::ModelKind::kMotionVqVae;
  Digest architecture{};
  std::string config_text;
  std::int64_t step = 0;
  std::vector<TensorRecord> records;

  const TensorRecord* find(std::string_view name) const;
  bool operator==(const CheckpointData&) const = default;
};

std::vector<std::uint8_t> encode(const CheckpointData& data);
/// Throws FormatError on truncation, bad magic or checksum failure.
CheckpointData decode(std::span<const std::uint8_t> bytes);

/// AdamW moments in parameters() order.
struct OptimizerState {
  std::int64_t step = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;

  bool operator==(const OptimizerState&) const = default;
};

struct MotionCheckpoint {
  TrainConfig config;
  model::MotionVqVae model;
  OptimizerState optimizer;
};

struct ImuCheckpoint {
  TrainConfig config;
  model::ImuTokenizer model;
  OptimizerState optimizer;
};

struct BaselineCheckpoint {
  TrainConfig config;
  model::BaselinePoser model;
  OptimizerState optimizer;
};

CheckpointData pack(const MotionCheckpoint& c);
CheckpointData pack(const ImuCheckpoint& c);
CheckpointData pack(const BaselineCheckpoint& c);

/// Each unpack validates the kind (CheckpointMismatch), the architecture
/// digest against the stored config (DigestMismatch) and every record's shape
/// (FormatError). Nothing outside the returned value is touched.
MotionCheckpoint unpack_motion(const CheckpointData& data);
ImuCheckpoint unpack_imu(const CheckpointData& data);
BaselineCheckpoint unpack_baseline(const CheckpointData& data);

void save(const std::string& path, const MotionCheckpoint& c);
void save(const std::string& path, const ImuCheckpoint& c);
void save(const std::string& path, const BaselineCheckpoint& c);
MotionCheckpoint load_motion(const std::string& path);
ImuCheckpoint load_imu(const std::string& path);
BaselineCheckpoint load_baseline(const std::string& path);

/// Kind stored in a checkpoint file.
model::ModelKind peek_kind(const std::string& path);

}  // namespace jrtok::ckpt
