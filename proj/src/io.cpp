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

#include "jrtok/io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "jrtok/binio.hpp"

namespace jrtok {
namespace binio {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path);
  return out;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

}  // namespace binio

namespace io {
namespace {

template <typename Seq>
std::vector<std::uint8_t> encode_frames(const char* magic, const Seq& seq, std::uint32_t units) {
  binio::ByteWriter w;
  w.put_magic(magic);
  w.put<float>(static_cast<float>(seq.fps));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(seq.size()));
  w.put<std::uint32_t>(units);
  for (double v : seq.flatten()) w.put<float>(static_cast<float>(v));
  return std::move(w.bytes());
}

template <typename Seq>
Seq decode_frames(const char* magic, std::span<const std::uint8_t> bytes, std::uint32_t units, std::size_t width) {
  binio::ByteReader r(bytes);
  r.expect_magic(magic);
  const double fps = r.get<float>();
  const auto frames = r.get<std::uint32_t>();
  if (r.get<std::uint32_t>() != units) throw Error(ErrorCode::kFormatError, std::string(magic) + ": unit count");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw Error(ErrorCode::kFormatError, std::string(magic) + ": bad fps");
  if (r.remaining() != std::size_t{frames} * width * sizeof(float))
    throw Error(ErrorCode::kFormatError, std::string(magic) + ": payload size");
  std::vector<double> data(std::size_t{frames} * width);
  for (double& v : data) v = r.get<float>();
  return Seq::unflatten(data, fps);
}

}  // namespace

std::vector<std::uint8_t> encode_motion(const motion::MotionSequence& seq) {
  return encode_frames("MJT1", seq, motion::kJointCount);
}
motion::MotionSequence decode_motion(std::span<const std::uint8_t> bytes) {
  return decode_frames<motion::MotionSequence>("MJT1", bytes, motion::kJointCount, motion::layout::kWidth);
}
void save_motion(const std::string& path, const motion::MotionSequence& seq) {
  binio::write_file(path, encode_motion(seq));
}
motion::MotionSequence load_motion(const std::string& path) { return decode_motion(binio::read_file(path)); }

std::vector<std::uint8_t> encode_imu(const imu::InertiaSequence& seq) {
  return encode_frames("MJI1", seq, imu::kSensorCount);
}
imu::InertiaSequence decode_imu(std::span<const std::uint8_t> bytes) {
  return decode_frames<imu::InertiaSequence>("MJI1", bytes, imu::kSensorCount, imu::layout::kWidth);
}
void save_imu(const std::string& path, const imu::InertiaSequence& seq) { binio::write_file(path, encode_imu(seq)); }
imu::InertiaSequence load_imu(const std::string& path) { return decode_imu(binio::read_file(path)); }

std::vector<std::uint8_t> encode_norm_stats(const imu::NormStats& stats) {
  binio::ByteWriter w;
  w.put_magic("MJN1");
  w.put<std::uint32_t>(imu::layout::kAccelDims);
  for (double v : stats.mean) w.put<double>(v);
  for (double v : stats.stddev) w.put<double>(v);
  return std::move(w.bytes());
}

imu::NormStats decode_norm_stats(std::span<const std::uint8_t> bytes) {
  binio::ByteReader r(bytes);
  r.expect_magic("MJN1");
  if (r.get<std::uint32_t>() != imu::layout::kAccelDims) throw Error(ErrorCode::kFormatError, "MJN1: dims");
  imu::NormStats s;
  for (double& v : s.mean) v = r.get<double>();
  for (double& v : s.stddev) v = r.get<double>();
  r.expect_end();
  return s;
}

}  // namespace io
}  // namespace jrtok
