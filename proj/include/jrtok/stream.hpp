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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jrtok/digest.hpp"
#include "jrtok/imusim.hpp"
#include "jrtok/models.hpp"
#include "jrtok/motion.hpp"

namespace jrtok::stream {

using Token16 = std::uint16_t;

struct TokenSequence {
  std::vector<Token16> tokens;
  std::uint16_t compression = 4;  // l, frames per token
  std::uint16_t codebook_size = 0;
  float fps = 60.0f;
  Digest codebook_digest{};
  std::uint64_t start_frame = 0;

  bool operator==(const TokenSequence&) const = default;
};

inline constexpr std::size_t kDefaultChunk = 16;
inline constexpr std::uint16_t kWireVersion = 1;

/// "MJT2" | u16 version | f32 fps | u16 l | u16 K | 32-byte codebook digest |
/// u64 start frame | u32 count | count x u16 tokens | u32 CRC-32 of all
/// preceding bytes.
inline constexpr std::size_t kWireHeader = 4 + 2 + 4 + 2 + 2 + 32 + 8 + 4;
inline constexpr std::size_t kWireTrailer = 4;

/// Throws OutOfRange if a token is not below K.
std::vector<std::uint8_t> write_token_stream(const TokenSequence& seq);
/// Throws FormatError on bad structure, checksum failure or ids >= K.
TokenSequence read_token_stream(std::span<const std::uint8_t> bytes);
void save_tokens(const std::string& path, const TokenSequence& seq);
TokenSequence load_tokens(const std::string& path);

/// Online tokenizer for one IMU stream. Raw frames are buffered; every full
/// chunk is normalized, encoded on its own and quantized. The model must
/// outlive the state.
class StreamState {
 public:
  /// chunk_len must be a positive multiple of 4. Throws InvalidArgument.
  explicit StreamState(const model::ImuTokenizer& model, std::size_t chunk_len = kDefaultChunk);

  /// Returns the tokens completed by these frames. Throws StatsMissing.
  std::vector<Token16> push_frames(const imu::InertiaSequence& fragment);

  std::size_t buffered() const { return pending_.size(); }
  std::uint64_t frames_seen() const { return frames_seen_; }
  std::size_t chunk_len() const { return chunk_len_; }
  /// Everything emitted so far with its stream metadata.
  const TokenSequence& emitted() const { return emitted_; }

 private:
  const model::ImuTokenizer* model_;
  std::size_t chunk_len_;
  std::vector<imu::InertiaFrame> pending_;
  std::uint64_t frames_seen_ = 0;
  TokenSequence emitted_;
};

/// Chunked tokenization of a whole recording; a trailing partial chunk is
/// dropped. Throws StatsMissing.
TokenSequence tokenize_offline(const model::ImuTokenizer& model, const imu::InertiaSequence& raw,
                               std::size_t chunk_len = kDefaultChunk);

struct DecodeOptions {
  /// Exponential smoothing of the decoded root position; off by default.
  bool smooth_root = false;
  double smoothing = 0.5;  // weight of the previous smoothed value
};

/// Motion for a token stream: l frames per token. Throws DigestMismatch when
/// the stream was produced with another codebook.
motion::MotionSequence decode_tokens(const TokenSequence& seq, const model::ImuTokenizer& model,
                                     const DecodeOptions& options = {});

// Length-prefixed packets for pipe mode: u32 frame count then frames x 72
// f32 in; u32 token count then u16 tokens out.
std::optional<imu::InertiaSequence> read_frame_packet(std::istream& in, double fps);
void write_frame_packet(std::ostream& out, const imu::InertiaSequence& frames);
void write_token_packet(std::ostream& out, std::span<const Token16> tokens);
std::optional<std::vector<Token16>> read_token_packet(std::istream& in);

}  // namespace jrtok::stream
