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

#include "jrtok/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "jrtok/error.hpp"

namespace jrtok {
namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kConfigInvalid, what); }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    invalid("bad number for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    invalid("bad integer for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

struct Field {
  std::function<void(TrainConfig&, std::string_view)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define JRTOK_DOUBLE(name, member)                                                           \
  {                                                                                          \
    name, Field {                                                                            \
      [](TrainConfig& c, std::string_view v) { c.member = parse_double(name, v); },          \
          [](const TrainConfig& c) { return fmt(c.member); }                                 \
    }                                                                                        \
  }
#define JRTOK_INT(name, member)                                                                       \
  {                                                                                                   \
    name, Field {                                                                                     \
      [](TrainConfig& c, std::string_view v) { c.member = parse_int<decltype(c.member)>(name, v); }, \
          [](const TrainConfig& c) { return std::to_string(c.member); }                               \
    }                                                                                                 \
  }

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      JRTOK_INT("K", codebook_size),
      JRTOK_INT("d_z", latent_dim),
      JRTOK_INT("hidden", hidden),
      JRTOK_INT("l", compression),
      JRTOK_DOUBLE("gamma", gamma),
      JRTOK_DOUBLE("lambda_recon", weights.recon),
      JRTOK_DOUBLE("lambda_commit", weights.commit),
      JRTOK_DOUBLE("lambda_contact", weights.contact),
      JRTOK_DOUBLE("lambda_slide", weights.slide),
      JRTOK_DOUBLE("lambda_code", weights.code),
      JRTOK_DOUBLE("lambda_dist", weights.dist),
      JRTOK_DOUBLE("lambda_zipf", weights.zipf),
      JRTOK_DOUBLE("lr_max", lr_max),
      JRTOK_DOUBLE("lr_min", lr_min),
      JRTOK_DOUBLE("weight_decay", weight_decay),
      JRTOK_INT("batch_size", batch_size),
      JRTOK_INT("total_steps", total_steps),
      JRTOK_INT("window", window),
      JRTOK_INT("seed", seed),
      JRTOK_DOUBLE("fps", fps),
      JRTOK_DOUBLE("gumbel_temperature", gumbel_temperature),
      JRTOK_DOUBLE("zipf_alpha", zipf_alpha),
      JRTOK_DOUBLE("zipf_beta", zipf_beta),
      JRTOK_INT("corpus_sequences", corpus_sequences),
      JRTOK_DOUBLE("corpus_duration", corpus_duration),
      JRTOK_INT("log_every", log_every),
  };
  return table;
}

#undef JRTOK_DOUBLE
#undef JRTOK_INT

}  // namespace

void TrainConfig::validate() const {
  if (codebook_size < 2) invalid("K must be >= 2");
  if (codebook_size > 65535) invalid("K must fit 16-bit token ids");
  if (latent_dim == 0 || hidden == 0) invalid("d_z and hidden must be positive");
  // The encoder has two stride-2 stages, so the rate is fixed.
  if (compression != 4) invalid("l must be 4 for this encoder");
  if (window == 0 || window % compression != 0) invalid("l must divide the window length");
  if (!(gamma > 0.0 && gamma < 1.0)) invalid("gamma must lie in (0, 1)");
  if (batch_size < 1) invalid("batch_size must be >= 1");
  if (total_steps < 0) invalid("total_steps must be >= 0");
  if (!(lr_max > 0.0) || lr_min < 0.0 || lr_min > lr_max) invalid("need 0 <= lr_min <= lr_max, lr_max > 0");
  if (weight_decay < 0.0) invalid("weight_decay must be >= 0");
  if (!(fps > 0.0)) invalid("fps must be positive");
  if (!(gumbel_temperature > 0.0)) invalid("gumbel_temperature must be positive");
  if (!(zipf_beta > -1.0)) invalid("zipf_beta must exceed -1");
  const double ws[] = {weights.recon, weights.commit, weights.contact, weights.slide,
                       weights.code,  weights.dist,   weights.zipf};
  for (double w : ws)
    if (w < 0.0) invalid("loss weights must be non-negative");
  if (corpus_sequences == 0) invalid("corpus_sequences must be positive");
  if (!(corpus_duration > 0.0)) invalid("corpus_duration must be positive");
  if (log_every < 1) invalid("log_every must be >= 1");
}

TrainConfig TrainConfig::parse(std::string_view text) {
  TrainConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) invalid("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) invalid("unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) invalid("duplicate key '" + std::string(key) + "'");
    it->second.set(cfg, value);
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(*this) + "\n";
  return out;
}

}  // namespace jrtok
