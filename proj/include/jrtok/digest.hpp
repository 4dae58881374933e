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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace jrtok {

using Digest = std::array<std::uint8_t, 32>;

/// SHA-256 (OpenSSL).
Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);
std::string to_hex(const Digest& d);

}  // namespace jrtok
