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

#include "jrtok/stream.hpp"

#include <zlib.h>

#include <istream>
#include <limits>
#include <ostream>

#include "jrtok/binio.hpp"
#include "jrtok/error.hpp"

namespace jrtok::stream {

namespace {

constexpr std::uint32_t kMaxPacketFrames = 1u << 20;

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
    crc = crc32(crc, bytes.data() + done, n);
    done += n;
  }
  return static_cast<std::uint32_t>(crc);
}

TokenSequence header_for(const model::ImuTokenizer& model, double fps) {
  TokenSequence s;
  s.compression = static_cast<std::uint16_t>(gradnet::SequenceEncoder::kDownsample);
  s.codebook_size = static_cast<std::uint16_t>(model.codebook().size());
  s.fps = static_cast<float>(fps);
  s.codebook_digest = model.codebook().digest();
  return s;
}

std::vector<Token16> to_token16(const std::vector<vq::Token>& tokens) {
  return {tokens.begin(), tokens.end()};
}

template <typename T>
bool read_exact(std::istream& in, T* out, std::size_t count) {
  in.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(count * sizeof(T)));
  return static_cast<std::size_t>(in.gcount()) == count * sizeof(T);
}

}  // namespace

std::vector<std::uint8_t> write_token_stream(const TokenSequence& seq) {
  for (Token16 t : seq.tokens) {
    if (t >= seq.codebook_size) throw Error(ErrorCode::kOutOfRange, "token id not below the codebook size");
  }
  if (seq.tokens.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kOutOfRange, "too many tokens for one stream");
  }
  binio::ByteWriter w;
  w.put_magic("MJT2");
  w.put<std::uint16_t>(kWireVersion);
  w.put<float>(seq.fps);
  w.put<std::uint16_t>(seq.compression);
  w.put<std::uint16_t>(seq.codebook_size);
  w.put_bytes(seq.codebook_digest);
  w.put<std::uint64_t>(seq.start_frame);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(seq.tokens.size()));
  for (Token16 t : seq.tokens) w.put<std::uint16_t>(t);
  w.put<std::uint32_t>(crc32_of(w.bytes()));
  return std::move(w.bytes());
}

TokenSequence read_token_stream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kWireHeader + kWireTrailer) throw Error(ErrorCode::kFormatError, "token stream truncated");
  binio::ByteReader r(bytes);
  r.expect_magic("MJT2");
  if (r.get<std::uint16_t>() != kWireVersion) throw Error(ErrorCode::kFormatError, "unsupported token stream version");
  TokenSequence s;
  s.fps = r.get<float>();
  s.compression = r.get<std::uint16_t>();
  s.codebook_size = r.get<std::uint16_t>();
  const auto digest = r.get_bytes(s.codebook_digest.size());
  std::copy(digest.begin(), digest.end(), s.codebook_digest.begin());
  s.start_frame = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  if (r.remaining() != std::size_t{count} * 2 + kWireTrailer) {
    throw Error(ErrorCode::kFormatError, "token count does not match the payload size");
  }
  s.tokens.resize(count);
  for (auto& t : s.tokens) t = r.get<std::uint16_t>();
  const std::size_t body = r.position();
  const auto stored = r.get<std::uint32_t>();
  if (stored != crc32_of(bytes.first(body))) throw Error(ErrorCode::kFormatError, "token stream checksum mismatch");
  if (s.compression == 0 || s.codebook_size == 0) throw Error(ErrorCode::kFormatError, "bad stream header");
  for (Token16 t : s.tokens) {
    if (t >= s.codebook_size) throw Error(ErrorCode::kFormatError, "token id out of range");
  }
  return s;
}

void save_tokens(const std::string& path, const TokenSequence& seq) {
  binio::write_file(path, write_token_stream(seq));
}

TokenSequence load_tokens(const std::string& path) { return read_token_stream(binio::read_file(path)); }

// ---------------------------------------------------------------------------

StreamState::StreamState(const model::ImuTokenizer& model, std::size_t chunk_len)
    : model_(&model), chunk_len_(chunk_len) {
  const std::size_t l = gradnet::SequenceEncoder::kDownsample;
  if (chunk_len == 0 || chunk_len % l != 0) {
    throw Error(ErrorCode::kInvalidArgument, "chunk length must be a positive multiple of 4");
  }
  emitted_ = header_for(model, 60.0);
  pending_.reserve(chunk_len);
}

std::vector<Token16> StreamState::push_frames(const imu::InertiaSequence& fragment) {
  if (!model_->stats()) throw Error(ErrorCode::kStatsMissing, "stream model has no normalization statistics");
  if (frames_seen_ == 0 && !fragment.frames.empty()) emitted_.fps = static_cast<float>(fragment.fps);
  std::vector<Token16> out;
  for (const imu::InertiaFrame& f : fragment.frames) {
    pending_.push_back(f);
    ++frames_seen_;
    if (pending_.size() == chunk_len_) {
      imu::InertiaSequence chunk{fragment.fps, std::move(pending_)};
      pending_.clear();
      const auto tokens = model_->tokenize(chunk);
      out.insert(out.end(), tokens.begin(), tokens.end());
    }
  }
  emitted_.tokens.insert(emitted_.tokens.end(), out.begin(), out.end());
  return out;
}

TokenSequence tokenize_offline(const model::ImuTokenizer& model, const imu::InertiaSequence& raw,
                               std::size_t chunk_len) {
  if (!model.stats()) throw Error(ErrorCode::kStatsMissing, "model has no normalization statistics");
  if (chunk_len == 0 || chunk_len % gradnet::SequenceEncoder::kDownsample != 0) {
    throw Error(ErrorCode::kInvalidArgument, "chunk length must be a positive multiple of 4");
  }
  TokenSequence s = header_for(model, raw.fps);
  for (std::size_t start = 0; start + chunk_len <= raw.size(); start += chunk_len) {
    imu::InertiaSequence chunk{raw.fps, {}};
    chunk.frames.assign(raw.frames.begin() + static_cast<std::ptrdiff_t>(start),
                        raw.frames.begin() + static_cast<std::ptrdiff_t>(start + chunk_len));
    const auto tokens = to_token16(model.tokenize(chunk));
    s.tokens.insert(s.tokens.end(), tokens.begin(), tokens.end());
  }
  return s;
}

motion::MotionSequence decode_tokens(const TokenSequence& seq, const model::ImuTokenizer& model,
                                     const DecodeOptions& options) {
  if (seq.codebook_digest != model.codebook().digest()) {
    throw Error(ErrorCode::kDigestMismatch, "token stream was produced with a different codebook");
  }
  if (seq.codebook_size != model.codebook().size() ||
      seq.compression != gradnet::SequenceEncoder::kDownsample) {
    throw Error(ErrorCode::kDigestMismatch, "token stream header does not match the model");
  }
  const std::vector<vq::Token> ids(seq.tokens.begin(), seq.tokens.end());
  motion::MotionSequence out = model.decode_tokens(ids, seq.fps);
  if (options.smooth_root && !out.frames.empty()) {
    const double a = options.smoothing;
    geom::Vec3 prev = out.frames.front().r;
    for (auto& f : out.frames) {
      prev = a * prev + (1.0 - a) * f.r;
      f.r = prev;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<imu::InertiaSequence> read_frame_packet(std::istream& in, double fps) {
  std::uint32_t count = 0;
  if (!read_exact(in, &count, 1)) return std::nullopt;
  if (count > kMaxPacketFrames) throw Error(ErrorCode::kFormatError, "frame packet too large");
  std::vector<float> raw(std::size_t{count} * imu::layout::kWidth);
  if (!read_exact(in, raw.data(), raw.size())) throw Error(ErrorCode::kFormatError, "truncated frame packet");
  const std::vector<double> data(raw.begin(), raw.end());
  return imu::InertiaSequence::unflatten(data, fps);
}

void write_frame_packet(std::ostream& out, const imu::InertiaSequence& frames) {
  const auto count = static_cast<std::uint32_t>(frames.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (double v : frames.flatten()) {
    const auto f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof f);
  }
}

void write_token_packet(std::ostream& out, std::span<const Token16> tokens) {
  const auto count = static_cast<std::uint32_t>(tokens.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(tokens.data()), static_cast<std::streamsize>(tokens.size_bytes()));
}

std::optional<std::vector<Token16>> read_token_packet(std::istream& in) {
  std::uint32_t count = 0;
  if (!read_exact(in, &count, 1)) return std::nullopt;
  if (count > kMaxPacketFrames) throw Error(ErrorCode::kFormatError, "token packet too large");
  std::vector<Token16> tokens(count);
  if (!read_exact(in, tokens.data(), tokens.size())) throw Error(ErrorCode::kFormatError, "truncated token packet");
  return tokens;
}

}  // namespace jrtok::stream
