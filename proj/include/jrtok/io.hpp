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
#include <vector>

#include "jrtok/imusim.hpp"
#include "jrtok/motion.hpp"

namespace jrtok::io {

// Sequence files store float32 samples; a load after save matches to float
// precision, not bitwise.

/// "MJT1" | f32 fps | u32 frames | u32 joints (22) | frames x 271 f32.
std::vector<std::uint8_t> encode_motion(const motion::MotionSequence& seq);
motion::MotionSequence decode_motion(std::span<const std::uint8_t> bytes);
void save_motion(const std::string& path, const motion::MotionSequence& seq);
motion::MotionSequence load_motion(const std::string& path);

/// "MJI1" | f32 fps | u32 frames | u32 sensors (6) | frames x 72 f32.
std::vector<std::uint8_t> encode_imu(const imu::InertiaSequence& seq);
imu::InertiaSequence decode_imu(std::span<const std::uint8_t> bytes);
void save_imu(const std::string& path, const imu::InertiaSequence& seq);
imu::InertiaSequence load_imu(const std::string& path);

/// "MJN1" | u32 dims (18) | 18 f64 means | 18 f64 stddevs.
std::vector<std::uint8_t> encode_norm_stats(const imu::NormStats& stats);
imu::NormStats decode_norm_stats(std::span<const std::uint8_t> bytes);

}  // namespace jrtok::io
