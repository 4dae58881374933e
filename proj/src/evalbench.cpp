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

#include "jrtok/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jrtok/error.hpp"

namespace jrtok::eval {

namespace {

Vec3 third_difference(std::span<const std::vector<Vec3>> p, std::size_t t, std::size_t j, double dt3) {
  const std::size_t n = p.size();
  if (t >= 2 && t + 2 < n) {
    return (p[t + 2][j] - 2.0 * p[t + 1][j] + 2.0 * p[t - 1][j] - p[t - 2][j]) / (2.0 * dt3);
  }
  // one-sided: forward near the start, backward near the end
  const std::size_t s = t < 2 ? std::min(t, n - 4) : std::max<std::size_t>(t, 3) - 3;
  return (p[s + 3][j] - 3.0 * p[s + 2][j] + 3.0 * p[s + 1][j] - p[s][j]) / dt3;
}

imu::InertiaSequence slice(const imu::InertiaSequence& seq, std::size_t start, std::size_t length) {
  imu::InertiaSequence out{seq.fps, {}};
  out.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(start),
                    seq.frames.begin() + static_cast<std::ptrdiff_t>(start + length));
  return out;
}

}  // namespace

double mpjpe(std::span<const std::vector<Vec3>> pred, std::span<const std::vector<Vec3>> gt) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::kLengthMismatch, "prediction and reference lengths differ");
  if (pred.empty()) throw Error(ErrorCode::kTooShort, "empty sequences");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].size() != gt[t].size()) throw Error(ErrorCode::kLengthMismatch, "joint counts differ");
    for (std::size_t j = 0; j < pred[t].size(); ++j) sum += (pred[t][j] - gt[t][j]).norm();
    count += pred[t].size();
  }
  return 100.0 * sum / static_cast<double>(count);
}

double mpjpe(const motion::MotionSequence& pred, const motion::MotionSequence& gt, const motion::Skeleton& skel) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::kLengthMismatch, "prediction and reference lengths differ");
  const auto a = motion::joint_positions(pred, skel);
  const auto b = motion::joint_positions(gt, skel);
  return mpjpe(a, b);
}

double jitter(std::span<const std::vector<Vec3>> positions, double fps) {
  const std::size_t n = positions.size();
  if (n < 4) throw Error(ErrorCode::kTooShort, "jitter needs at least 4 frames");
  if (!(fps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "fps must be positive");
  const double dt = 1.0 / fps;
  const double dt3 = dt * dt * dt;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < positions[t].size(); ++j) sum += third_difference(positions, t, j, dt3).norm();
    count += positions[t].size();
  }
  if (count == 0) throw Error(ErrorCode::kTooShort, "no joints");
  return 1e-2 * sum / static_cast<double>(count);
}

double jitter(const motion::MotionSequence& seq, const motion::Skeleton& skel) {
  if (seq.size() < 4) throw Error(ErrorCode::kTooShort, "jitter needs at least 4 frames");
  return jitter(motion::joint_positions(seq, skel), seq.fps);
}

void MetricSums::add(double mpjpe_cm, double jitter_value, std::size_t n) {
  mpjpe_sum += mpjpe_cm * static_cast<double>(n);
  jitter_sum += jitter_value * static_cast<double>(n);
  frames += n;
}

double MetricSums::mpjpe() const { return frames ? mpjpe_sum / static_cast<double>(frames) : 0.0; }
double MetricSums::jitter() const { return frames ? jitter_sum / static_cast<double>(frames) : 0.0; }

const LevelMetrics& MetricReport::at(std::string_view method, int noised) const {
  for (const auto& r : rows)
    if (r.method == method && r.noised == noised) return r;
  throw Error(ErrorCode::kOutOfRange, "no row for " + std::string(method) + " at level " + std::to_string(noised));
}

bool MetricReport::operator==(const MetricReport& o) const {
  return sequence_ids == o.sequence_ids && rows == o.rows && noise.orientation == o.noise.orientation &&
         noise.acceleration == o.noise.acceleration && noise.gyro == o.noise.gyro && seed == o.seed;
}

// ---------------------------------------------------------------------------

Benchmark::Benchmark(const ckpt::ImuCheckpoint& imu, const ckpt::MotionCheckpoint& motion,
                     const ckpt::BaselineCheckpoint& baseline)
    : tokenizer_(imu.model), baseline_(baseline.model), window_(imu.config.window) {
  const auto ia = imu.model.architecture(), ma = motion.model.architecture(), ba = baseline.model.architecture();
  if (ia.latent != ma.latent || ia.codebook_size != ma.codebook_size || ia.hidden != ma.hidden) {
    throw Error(ErrorCode::kCheckpointMismatch, "IMU tokenizer and motion model latent spaces differ");
  }
  std::vector<model::NamedParam> motion_decoder;
  motion.model.decoder().collect("decoder", motion_decoder);
  if (model::parameter_digest(imu.model.decoder_parameters()) != model::parameter_digest(motion_decoder)) {
    throw Error(ErrorCode::kCheckpointMismatch, "IMU tokenizer was not trained against this motion model");
  }
  if (ba.hidden != ia.hidden || ba.latent != ia.latent) {
    throw Error(ErrorCode::kCheckpointMismatch, "baseline capacity differs from the IMU tokenizer");
  }
  if (!imu.model.stats() || !baseline.model.stats()) {
    throw Error(ErrorCode::kStatsMissing, "checkpoints carry no normalization statistics");
  }
  if (window_ == 0 || window_ % 4 != 0) throw Error(ErrorCode::kConfigInvalid, "bad evaluation window");
}

std::uint64_t case_seed(std::uint64_t seed, int level, std::size_t index) {
  return Rng(seed).split(0xbe4c0000ULL + static_cast<std::uint64_t>(level)).split(index).seed();
}

std::uint64_t case_sequence_seed(std::uint64_t case_seed, std::size_t index) {
  return Rng(case_seed).split(index).seed();
}

Benchmark::CaseResult Benchmark::evaluate_case(const train::PairedCorpus& corpus, std::span<const int> sensors,
                                               const imu::ChannelSigma& noise, std::uint64_t seed) const {
  const motion::Skeleton& skel = motion::Skeleton::standard();
  CaseResult out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    imu::InertiaSequence input = corpus.imu[i];
    if (!sensors.empty()) {
      imu::NoiseConfig cfg;
      cfg.gaussian = noise;
      cfg.corrupted_sensors.assign(sensors.begin(), sensors.end());
      cfg.seed = case_sequence_seed(seed, i);
      input = imu::apply_corruption(input, cfg);
    }
    const imu::InertiaSequence tok_in = imu::normalize_acceleration(input, *tokenizer_.stats());
    const imu::InertiaSequence base_in = imu::normalize_acceleration(input, *baseline_.stats());
    const motion::MotionSequence& gt_seq = corpus.motion[i];
    for (std::size_t start = 0; start + window_ <= gt_seq.size(); start += window_) {
      const auto gt = motion::joint_positions(train::canonical_window(gt_seq, start, window_), skel);
      const auto tok = motion::joint_positions(
          tokenizer_.decode_tokens(tokenizer_.tokenize_normalized(slice(tok_in, start, window_)), gt_seq.fps), skel);
      const auto base = motion::joint_positions(baseline_.predict_normalized(slice(base_in, start, window_)), skel);
      out.tokenized.add(mpjpe(tok, gt), jitter(tok, gt_seq.fps), window_);
      out.baseline.add(mpjpe(base, gt), jitter(base, gt_seq.fps), window_);
    }
  }
  return out;
}

std::vector<std::vector<int>> Benchmark::sensor_sets(int level, std::size_t combinations, std::uint64_t seed) {
  if (level < 0 || level > imu::kSensorCount) throw Error(ErrorCode::kInvalidArgument, "noise level out of range");
  if (level == 0) return {{}};
  if (level == 1) {
    std::vector<std::vector<int>> out;
    for (int s = 0; s < imu::kSensorCount; ++s) out.push_back({s});
    return out;
  }
  // distinct subsets of `level` sensors, capped by how many exist
  std::size_t available = 1;
  for (int k = 0; k < level; ++k) available = available * (imu::kSensorCount - k) / (k + 1);
  const std::size_t want = std::min(combinations, available);
  Rng rng = Rng(seed).split(0x5e45ULL + static_cast<std::uint64_t>(level));
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> out;
  while (out.size() < want) {
    std::vector<int> all(imu::kSensorCount);
    std::iota(all.begin(), all.end(), 0);
    for (int k = 0; k < level; ++k) {
      const auto pick = k + static_cast<int>(rng.index(static_cast<std::uint64_t>(imu::kSensorCount - k)));
      std::swap(all[k], all[pick]);
    }
    std::vector<int> set(all.begin(), all.begin() + level);
    std::sort(set.begin(), set.end());
    if (seen.insert(set).second) out.push_back(std::move(set));
  }
  return out;
}

MetricReport Benchmark::run(const train::PairedCorpus& corpus, const BenchmarkOptions& options) const {
  if (corpus.size() == 0) throw Error(ErrorCode::kEmptyDataset, "empty benchmark corpus");
  MetricReport report;
  report.sequence_ids = corpus.ids;
  report.noise = options.noise;
  report.seed = options.seed;

  std::vector<int> levels{0};
  for (int l : options.levels)
    if (l != 0 && std::find(levels.begin(), levels.end(), l) == levels.end()) levels.push_back(l);

  for (int level : levels) {
    const auto sets = sensor_sets(level, options.combinations, options.seed);
    double tok_mpjpe = 0.0, tok_jitter = 0.0, base_mpjpe = 0.0, base_jitter = 0.0;
    for (std::size_t c = 0; c < sets.size(); ++c) {
      const CaseResult r = evaluate_case(corpus, sets[c], options.noise, case_seed(options.seed, level, c));
      tok_mpjpe += r.tokenized.mpjpe();
      tok_jitter += r.tokenized.jitter();
      base_mpjpe += r.baseline.mpjpe();
      base_jitter += r.baseline.jitter();
    }
    const double n = static_cast<double>(sets.size());
    report.rows.push_back({kTokenized, level, tok_mpjpe / n, tok_jitter / n, sets.size()});
    report.rows.push_back({kBaseline, level, base_mpjpe / n, base_jitter / n, sets.size()});
  }
  // method-major order
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const LevelMetrics& a, const LevelMetrics& b) { return a.method > b.method; });
  return report;
}

MetricReport run_noise_benchmark(const ckpt::ImuCheckpoint& imu, const ckpt::MotionCheckpoint& motion,
                                 const ckpt::BaselineCheckpoint& baseline, const train::PairedCorpus& corpus,
                                 const BenchmarkOptions& options) {
  return Benchmark(imu, motion, baseline).run(corpus, options);
}

train::PairedCorpus heldout_corpus(std::uint64_t seed, std::size_t count, double duration_s, double fps) {
  train::PairedCorpus c = train::synthetic_corpus(count, duration_s, fps, seed ^ train::kHeldOutSeed);
  for (auto& id : c.ids) id = "heldout_" + id;
  return c;
}

// ---------------------------------------------------------------------------

std::string render_table(const MetricReport& report) {
  const char* header[] = {"method", "noised", "MPJPE (cm)", "Jitter (1e2 m/s^3)", "Mesh Err", "cases"};
  std::vector<std::vector<std::string>> cells;
  cells.emplace_back(std::begin(header), std::end(header));
  char buf[64];
  for (const auto& r : report.rows) {
    std::vector<std::string> row{r.method, r.noised == 0 ? "clean" : std::to_string(r.noised)};
    std::snprintf(buf, sizeof buf, "%.3f", r.mpjpe);
    row.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "%.4f", r.jitter);
    row.emplace_back(buf);
    row.emplace_back("unavailable");
    row.push_back(std::to_string(r.cases));
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      const std::string& s = cells[i][c];
      // text left, numbers right
      if (c < 2) out << s << std::string(width[c] - s.size(), ' ');
      else out << std::string(width[c] - s.size(), ' ') << s;
      out << (c + 1 < cells[i].size() ? "  " : "\n");
    }
    if (i == 0) {
      std::size_t total = 2 * (width.size() - 1);
      for (std::size_t w : width) total += w;
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

std::string to_record(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "MJR1";
  j["seed"] = report.seed;
  j["noise"] = {{"orientation", report.noise.orientation},
                {"acceleration", report.noise.acceleration},
                {"gyro", report.noise.gyro}};
  j["sequences"] = report.sequence_ids;
  j["mesh_error"] = "unavailable";
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", r.method}, {"noised", r.noised}, {"mpjpe_cm", r.mpjpe}, {"jitter", r.jitter},
                    {"cases", r.cases}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

MetricReport parse_record(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "MJR1") throw Error(ErrorCode::kFormatError, "not a benchmark record");
    MetricReport r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.noise.orientation = j.at("noise").at("orientation").get<double>();
    r.noise.acceleration = j.at("noise").at("acceleration").get<double>();
    r.noise.gyro = j.at("noise").at("gyro").get<double>();
    r.sequence_ids = j.at("sequences").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("method").get<std::string>(), row.at("noised").get<int>(),
                        row.at("mpjpe_cm").get<double>(), row.at("jitter").get<double>(),
                        row.at("cases").get<std::size_t>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("benchmark record: ") + e.what());
  }
}

}  // namespace jrtok::eval
