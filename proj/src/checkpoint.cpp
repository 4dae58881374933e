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

#include "jrtok/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "jrtok/binio.hpp"
#include "jrtok/error.hpp"

namespace jrtok::ckpt {

namespace {

constexpr std::size_t kChecksumSize = 32;
constexpr std::uint32_t kMaxRank = 8;

void add_record(std::vector<TensorRecord>& out, std::string name, const gradnet::Shape& shape,
                std::span<const double> values) {
  TensorRecord r;
  r.name = std::move(name);
  r.shape.assign(shape.begin(), shape.end());
  r.values.assign(values.begin(), values.end());
  out.push_back(std::move(r));
}

void add_params(std::vector<TensorRecord>& out, const std::vector<gradnet::NamedParam>& params) {
  for (const auto& p : params) add_record(out, p.name, p.tensor.shape(), p.tensor.values());
}

void add_optimizer(std::vector<TensorRecord>& out, const std::vector<gradnet::NamedParam>& params,
                   const OptimizerState& opt) {
  if (opt.first.empty() && opt.second.empty()) return;
  if (opt.first.size() != params.size() || opt.second.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match the parameter list");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    add_record(out, "adamw.m/" + params[i].name, params[i].tensor.shape(), opt.first[i]);
    add_record(out, "adamw.v/" + params[i].name, params[i].tensor.shape(), opt.second[i]);
  }
}

void add_codebook(std::vector<TensorRecord>& out, const vq::Codebook& cb) {
  add_record(out, "codebook.entries", {cb.size(), cb.dim()}, cb.entries());
  add_record(out, "codebook.sigma", {cb.size(), cb.dim()}, cb.ema_sigma());
  add_record(out, "codebook.delta", {cb.size()}, cb.ema_delta());
  std::vector<double> streak(cb.dead_streak().begin(), cb.dead_streak().end());
  add_record(out, "codebook.dead_streak", {cb.size()}, streak);
}

void add_stats(std::vector<TensorRecord>& out, const std::optional<imu::NormStats>& stats) {
  if (!stats) return;
  add_record(out, "stats.mean", {stats->mean.size()}, stats->mean);
  add_record(out, "stats.stddev", {stats->stddev.size()}, stats->stddev);
}

CheckpointData header(model::ModelKind kind, const model::Architecture& arch, const TrainConfig& cfg,
                      const OptimizerState& opt) {
  CheckpointData d;
  d.kind = kind;
  d.architecture = arch.digest();
  d.config_text = cfg.to_text();
  d.step = opt.step;
  return d;
}

const TensorRecord& require(const CheckpointData& data, const std::string& name, const gradnet::Shape& shape) {
  const TensorRecord* r = data.find(name);
  if (!r) throw Error(ErrorCode::kFormatError, "checkpoint lacks record " + name);
  if (!std::equal(r->shape.begin(), r->shape.end(), shape.begin(), shape.end())) {
    throw Error(ErrorCode::kFormatError, "record " + name + " has the wrong shape");
  }
  return *r;
}

void load_params(const CheckpointData& data, const std::vector<gradnet::NamedParam>& params) {
  for (const auto& p : params) {
    const TensorRecord& r = require(data, p.name, p.tensor.shape());
    gradnet::Tensor dst = p.tensor;
    std::copy(r.values.begin(), r.values.end(), dst.mutable_values().begin());
  }
}

OptimizerState load_optimizer(const CheckpointData& data, const std::vector<gradnet::NamedParam>& params) {
  OptimizerState opt;
  opt.step = data.step;
  if (params.empty() || !data.find("adamw.m/" + params.front().name)) return opt;
  for (const auto& p : params) {
    opt.first.push_back(require(data, "adamw.m/" + p.name, p.tensor.shape()).values);
    opt.second.push_back(require(data, "adamw.v/" + p.name, p.tensor.shape()).values);
  }
  return opt;
}

void load_codebook(const CheckpointData& data, vq::Codebook& cb) {
  const std::size_t k = cb.size(), dim = cb.dim();
  std::vector<double> entries = require(data, "codebook.entries", {k, dim}).values;
  std::vector<double> sigma = require(data, "codebook.sigma", {k, dim}).values;
  std::vector<double> delta = require(data, "codebook.delta", {k}).values;
  std::vector<std::uint32_t> streak;
  for (double v : require(data, "codebook.dead_streak", {k}).values) {
    if (!(v >= 0.0 && v <= std::numeric_limits<std::uint32_t>::max()) || v != static_cast<std::uint32_t>(v)) {
      throw Error(ErrorCode::kFormatError, "bad dead-code counter");
    }
    streak.push_back(static_cast<std::uint32_t>(v));
  }
  cb.restore(k, dim, cb.gamma(), std::move(entries), std::move(sigma), std::move(delta), std::move(streak));
}

std::optional<imu::NormStats> load_stats(const CheckpointData& data) {
  if (!data.find("stats.mean")) return std::nullopt;
  imu::NormStats s;
  const auto& mean = require(data, "stats.mean", {s.mean.size()}).values;
  const auto& sd = require(data, "stats.stddev", {s.stddev.size()}).values;
  std::copy(mean.begin(), mean.end(), s.mean.begin());
  std::copy(sd.begin(), sd.end(), s.stddev.begin());
  return s;
}

TrainConfig open(const CheckpointData& data, model::ModelKind expected) {
  if (data.kind != expected) {
    throw Error(ErrorCode::kCheckpointMismatch, "checkpoint holds a " + std::string(model::to_string(data.kind)) +
                                                    ", expected " + std::string(model::to_string(expected)));
  }
  return TrainConfig::parse(data.config_text);
}

void check_architecture(const CheckpointData& data, const model::Architecture& arch) {
  if (arch.digest() != data.architecture) {
    throw Error(ErrorCode::kDigestMismatch, "architecture digest does not match the stored config");
  }
}

}  // namespace

const TensorRecord* CheckpointData::find(std::string_view name) const {
  for (const auto& r : records)
    if (r.name == name) return &r;
  return nullptr;
}

std::vector<std::uint8_t> encode(const CheckpointData& data) {
  binio::ByteWriter w;
  w.put_magic("MJC1");
  w.put<std::uint32_t>(kVersion);
  w.put_string(model::to_string(data.kind));
  w.put_bytes(data.architecture);
  w.put_string(data.config_text);
  w.put<std::int64_t>(data.step);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(data.records.size()));
  for (const TensorRecord& r : data.records) {
    if (r.name.size() > std::numeric_limits<std::uint16_t>::max() || r.shape.size() > kMaxRank) {
      throw Error(ErrorCode::kInvalidArgument, "record name or rank too large: " + r.name);
    }
    std::uint64_t n = 1;
    for (auto d : r.shape) n *= d;
    if (n != r.values.size()) throw Error(ErrorCode::kShapeMismatch, "record " + r.name + " size/shape disagree");
    w.put<std::uint16_t>(static_cast<std::uint16_t>(r.name.size()));
    w.put_magic(r.name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(r.shape.size()));
    for (auto d : r.shape) w.put<std::uint64_t>(d);
    for (double v : r.values) w.put<double>(v);
  }
  const Digest sum = sha256(std::span<const std::uint8_t>(w.bytes()));
  w.put_bytes(sum);
  return std::move(w.bytes());
}

CheckpointData decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + kChecksumSize) throw Error(ErrorCode::kFormatError, "checkpoint truncated");
  const auto body = bytes.first(bytes.size() - kChecksumSize);
  const Digest sum = sha256(body);
  if (std::memcmp(sum.data(), bytes.data() + body.size(), kChecksumSize) != 0) {
    throw Error(ErrorCode::kFormatError, "checkpoint checksum mismatch (truncated or corrupted)");
  }
  binio::ByteReader r(body);
  r.expect_magic("MJC1");
  if (r.get<std::uint32_t>() != kVersion) throw Error(ErrorCode::kFormatError, "unsupported checkpoint version");
  CheckpointData d;
  d.kind = model::model_kind_from_string(r.get_string(64));
  const auto digest = r.get_bytes(d.architecture.size());
  std::copy(digest.begin(), digest.end(), d.architecture.begin());
  d.config_text = r.get_string();
  d.step = r.get<std::int64_t>();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord rec;
    const auto name_len = r.get<std::uint16_t>();
    const auto name = r.get_bytes(name_len);
    rec.name.assign(name.begin(), name.end());
    const auto rank = r.get<std::uint32_t>();
    if (rank > kMaxRank) throw Error(ErrorCode::kFormatError, "record rank out of range");
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      rec.shape.push_back(r.get<std::uint64_t>());
      if (rec.shape.back() != 0 && n > r.remaining() / rec.shape.back()) {
        throw Error(ErrorCode::kFormatError, "record larger than the file");
      }
      n *= rec.shape.back();
    }
    if (n > r.remaining() / sizeof(double)) throw Error(ErrorCode::kFormatError, "record larger than the file");
    rec.values.resize(n);
    const auto raw = r.get_bytes(n * sizeof(double));
    std::memcpy(rec.values.data(), raw.data(), raw.size());
    d.records.push_back(std::move(rec));
  }
  r.expect_end();
  return d;
}

CheckpointData pack(const MotionCheckpoint& c) {
  CheckpointData d = header(model::ModelKind::kMotionVqVae, c.model.architecture(), c.config, c.optimizer);
  const auto params = c.model.parameters();
  add_params(d.records, params);
  add_codebook(d.records, c.model.codebook());
  add_optimizer(d.records, params, c.optimizer);
  return d;
}

CheckpointData pack(const ImuCheckpoint& c) {
  CheckpointData d = header(model::ModelKind::kImuTokenizer, c.model.architecture(), c.config, c.optimizer);
  const auto params = c.model.parameters();
  add_params(d.records, params);
  add_params(d.records, c.model.decoder_parameters());
  add_codebook(d.records, c.model.codebook());
  add_stats(d.records, c.model.stats());
  add_optimizer(d.records, params, c.optimizer);
  return d;
}

CheckpointData pack(const BaselineCheckpoint& c) {
  CheckpointData d = header(model::ModelKind::kBaselinePoser, c.model.architecture(), c.config, c.optimizer);
  const auto params = c.model.parameters();
  add_params(d.records, params);
  add_stats(d.records, c.model.stats());
  add_optimizer(d.records, params, c.optimizer);
  return d;
}

MotionCheckpoint unpack_motion(const CheckpointData& data) {
  MotionCheckpoint c;
  c.config = open(data, model::ModelKind::kMotionVqVae);
  c.model = model::MotionVqVae(c.config, c.config.seed);
  check_architecture(data, c.model.architecture());
  const auto params = c.model.parameters();
  load_params(data, params);
  load_codebook(data, c.model.codebook());
  c.optimizer = load_optimizer(data, params);
  return c;
}

ImuCheckpoint unpack_imu(const CheckpointData& data) {
  ImuCheckpoint c;
  c.config = open(data, model::ModelKind::kImuTokenizer);
  c.model = model::ImuTokenizer(c.config, c.config.seed);
  check_architecture(data, c.model.architecture());
  const auto params = c.model.parameters();
  load_params(data, params);
  load_params(data, c.model.decoder_parameters());
  load_codebook(data, c.model.codebook());
  if (auto s = load_stats(data)) c.model.set_stats(*s);
  c.optimizer = load_optimizer(data, params);
  return c;
}

BaselineCheckpoint unpack_baseline(const CheckpointData& data) {
  BaselineCheckpoint c;
  c.config = open(data, model::ModelKind::kBaselinePoser);
  c.model = model::BaselinePoser(c.config, c.config.seed);
  check_architecture(data, c.model.architecture());
  const auto params = c.model.parameters();
  load_params(data, params);
  if (auto s = load_stats(data)) c.model.set_stats(*s);
  c.optimizer = load_optimizer(data, params);
  return c;
}

void save(const std::string& path, const MotionCheckpoint& c) { binio::write_file(path, encode(pack(c))); }
void save(const std::string& path, const ImuCheckpoint& c) { binio::write_file(path, encode(pack(c))); }
void save(const std::string& path, const BaselineCheckpoint& c) { binio::write_file(path, encode(pack(c))); }

MotionCheckpoint load_motion(const std::string& path) { return unpack_motion(decode(binio::read_file(path))); }
ImuCheckpoint load_imu(const std::string& path) { return unpack_imu(decode(binio::read_file(path))); }
BaselineCheckpoint load_baseline(const std::string& path) { return unpack_baseline(decode(binio::read_file(path))); }

model::ModelKind peek_kind(const std::string& path) { return decode(binio::read_file(path)).kind; }

}  // namespace jrtok::ckpt
