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

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jrtok/error.hpp"

namespace jrtok::binio {

static_assert(std::endian::native == std::endian::little, "wire formats assume a little-endian host");

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
  void put_magic(std::string_view magic) {
    bytes_.insert(bytes_.end(), magic.begin(), magic.end());
  }
  /// u32 length prefix.
  void put_string(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    put_magic(s);
  }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked reader; any overrun throws FormatError.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T out;
    std::memcpy(&out, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return out;
  }
  std::span<const std::uint8_t> get_bytes(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  void expect_magic(std::string_view magic) {
    auto got = get_bytes(magic.size());
    if (std::memcmp(got.data(), magic.data(), magic.size()) != 0)
      throw Error(ErrorCode::kFormatError, "bad magic, expected " + std::string(magic));
  }
  std::string get_string(std::size_t max_len = 1u << 24) {
    const auto n = get<std::uint32_t>();
    if (n > max_len) throw Error(ErrorCode::kFormatError, "string length out of range");
    auto b = get_bytes(n);
    return std::string(b.begin(), b.end());
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) throw Error(ErrorCode::kFormatError, "trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw Error(ErrorCode::kFormatError, "unexpected end of data");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

/// Throws IoError.
std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace jrtok::binio
