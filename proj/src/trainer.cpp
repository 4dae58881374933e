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

#include "jrtok/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "jrtok/error.hpp"
#include "jrtok/gradnet/ops.hpp"
#include "jrtok/vqcodec.hpp"

namespace jrtok::train {

namespace g = gradnet;
namespace ml = motion::layout;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename Seq>
std::vector<std::size_t> lengths_of(const std::vector<Seq>& seqs) {
  std::vector<std::size_t> out;
  for (const auto& s : seqs) out.push_back(s.size());
  return out;
}

std::vector<WindowRef> checked_windows(std::span<const std::size_t> lengths, std::size_t window) {
  std::vector<WindowRef> w = make_windows(lengths, window);
  if (w.empty()) throw Error(ErrorCode::kEmptyDataset, "no sequence holds a full training window");
  return w;
}

void copy_window(std::span<const double> frame_major, std::size_t start, std::size_t length, std::size_t width,
                 double* out) {
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t c = 0; c < width; ++c) out[c * length + t] = frame_major[(start + t) * width + c];
}

g::AdamWConfig adamw_config(const TrainConfig& cfg) {
  g::AdamWConfig a;
  a.weight_decay = cfg.weight_decay;
  return a;
}

std::vector<double> zipf_for(const TrainConfig& cfg) {
  return vq::zipf_target({cfg.zipf_alpha, cfg.zipf_beta, cfg.codebook_size});
}

struct QuantizedRows {
  Tensor codes;  // [N, dim], constant
  std::vector<vq::Token> tokens;
};

QuantizedRows quantize_rows(const Tensor& rows, const vq::Codebook& cb) {
  vq::Quantized q = vq::quantize(rows.values(), cb);
  return {Tensor::from(rows.shape(), std::move(q.codes)), std::move(q.indices)};
}

std::vector<imu::InertiaSequence> normalize_all(const std::vector<imu::InertiaSequence>& raw,
                                                const imu::NormStats& stats) {
  std::vector<imu::InertiaSequence> out;
  out.reserve(raw.size());
  for (const auto& s : raw) out.push_back(imu::normalize_acceleration(s, stats));
  return out;
}

void check_pairs(const PairedCorpus& corpus) {
  if (corpus.size() == 0) throw Error(ErrorCode::kEmptyDataset, "empty paired corpus");
  if (corpus.imu.size() != corpus.motion.size()) {
    throw Error(ErrorCode::kLengthMismatch, "motion and IMU corpora differ in size");
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.imu[i].size() != corpus.motion[i].size()) {
      throw Error(ErrorCode::kLengthMismatch, "pair " + std::to_string(i) + " is not frame-aligned");
    }
  }
}

ckpt::OptimizerState optimizer_state(const g::AdamW& opt) {
  return {opt.step_count(), opt.first_moments(), opt.second_moments()};
}

template <typename Trainer>
void run_all(Trainer& t, std::int64_t total, const StepCallback& on_step) {
  while (t.step_count() < total) {
    const StepRecord r = t.step();
    if (on_step) on_step(r);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// data

PairedCorpus synthetic_corpus(std::size_t count, double duration_s, double fps, std::uint64_t seed) {
  static constexpr motion::Style kStyles[] = {motion::Style::kWalk, motion::Style::kSquat, motion::Style::kArmRaise,
                                              motion::Style::kIdleSway};
  const motion::Skeleton& skel = motion::Skeleton::standard();
  const imu::SensorPlacement placement = imu::SensorPlacement::standard();
  const Rng root(seed);
  PairedCorpus out;
  for (std::size_t i = 0; i < count; ++i) {
    const motion::Style style = kStyles[i % 4];
    const Rng item = root.split(i);
    const motion::RawPoseTrack track =
        motion::generate_synthetic_motion(item.split(0).seed(), duration_s, fps, style);
    out.ids.push_back(std::string(motion::to_string(style)) + "_" + std::to_string(i));
    out.motion.push_back(motion::build_motion_representation(track, skel));
    out.imu.push_back(imu::apply_drift(imu::synthesize_imu(track, skel, placement),
                                       imu::NoiseConfig::default_drift(item.split(1).seed())));
  }
  return out;
}

std::vector<WindowRef> make_windows(std::span<const std::size_t> lengths, std::size_t window) {
  if (window < 2) throw Error(ErrorCode::kInvalidArgument, "window must be at least 2 frames");
  const std::size_t stride = window / 2;
  std::vector<WindowRef> out;
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    for (std::size_t start = 0; start + window <= lengths[s]; start += stride) out.push_back({s, start});
  }
  return out;
}

motion::MotionSequence canonical_window(const motion::MotionSequence& seq, std::size_t start, std::size_t length) {
  if (start + length > seq.size()) throw Error(ErrorCode::kOutOfRange, "window past the end of the sequence");
  motion::MotionSequence out{seq.fps, {}};
  out.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(start),
                    seq.frames.begin() + static_cast<std::ptrdiff_t>(start + length));
  if (!out.frames.empty()) {
    const double x0 = out.frames[0].r.x(), z0 = out.frames[0].r.z();
    for (auto& f : out.frames) {
      f.r.x() -= x0;
      f.r.z() -= z0;
    }
  }
  return out;
}

Tensor motion_batch(std::span<const motion::MotionSequence> corpus, std::span<const WindowRef> windows,
                    std::span<const std::size_t> pick, std::size_t length) {
  const std::size_t width = ml::kWidth;
  std::vector<double> data(pick.size() * width * length);
  for (std::size_t b = 0; b < pick.size(); ++b) {
    const WindowRef& w = windows[pick[b]];
    const std::vector<double> flat = canonical_window(corpus[w.sequence], w.start, length).flatten();
    copy_window(flat, 0, length, width, data.data() + b * width * length);
  }
  return Tensor::from({pick.size(), width, length}, std::move(data));
}

Tensor imu_batch(std::span<const imu::InertiaSequence> corpus, std::span<const WindowRef> windows,
                 std::span<const std::size_t> pick, std::size_t length) {
  const std::size_t width = imu::layout::kWidth;
  std::vector<double> data(pick.size() * width * length);
  for (std::size_t b = 0; b < pick.size(); ++b) {
    const WindowRef& w = windows[pick[b]];
    const auto& seq = corpus[w.sequence];
    if (w.start + length > seq.size()) throw Error(ErrorCode::kOutOfRange, "window past the end of the sequence");
    double* out = data.data() + b * width * length;
    std::vector<double> frame(width);
    for (std::size_t t = 0; t < length; ++t) {
      seq.frames[w.start + t].flatten_into(frame);
      for (std::size_t c = 0; c < width; ++c) out[c * length + t] = frame[c];
    }
  }
  return Tensor::from({pick.size(), width, length}, std::move(data));
}

BatchSampler::BatchSampler(std::size_t windows, std::size_t batch_size, std::uint64_t seed)
    : windows_(windows), batch_size_(batch_size), seed_(seed) {
  if (windows == 0) throw Error(ErrorCode::kEmptyDataset, "no training windows");
  if (batch_size == 0) throw Error(ErrorCode::kConfigInvalid, "batch_size must be >= 1");
  reshuffle();
}

void BatchSampler::reshuffle() {
  order_.resize(windows_);
  std::iota(order_.begin(), order_.end(), 0);
  Rng rng = Rng(seed_).split(epoch_);
  for (std::size_t i = windows_; i > 1; --i) std::swap(order_[i - 1], order_[rng.index(i)]);
  cursor_ = 0;
}

std::vector<std::size_t> BatchSampler::next() {
  std::vector<std::size_t> out;
  out.reserve(batch_size_);
  while (out.size() < batch_size_) {
    if (cursor_ == order_.size()) {
      ++epoch_;
      reshuffle();
    }
    out.push_back(order_[cursor_++]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// reports

double StepRecord::get(std::string_view name) const {
  for (const auto& [k, v] : scalars)
    if (k == name) return v;
  throw Error(ErrorCode::kOutOfRange, "no scalar named " + std::string(name));
}

std::string StepRecord::to_json(std::string_view stage) const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["step"] = step;
  j["lr"] = lr;
  j["wall_s"] = wall_seconds;
  for (const auto& [k, v] : scalars) j[k] = v;
  return j.dump();
}

void TrainReport::write_jsonl(std::ostream& out) const {
  for (const StepRecord& r : steps) out << r.to_json(stage) << '\n';
}

std::vector<double> motion_frequency(const model::MotionVqVae& model, const Tensor& batch, double temperature) {
  const Tensor rows = g::to_rows(model.encode(batch).detach());
  const Tensor f = vq::batch_token_frequency(rows, model.codebook().entries_tensor(), temperature, nullptr);
  return {f.values().begin(), f.values().end()};
}

std::vector<double> imu_frequency(const model::ImuTokenizer& model, const Tensor& batch, double temperature) {
  const Tensor rows = g::to_rows(model.encode(batch).detach());
  const Tensor f = vq::batch_token_frequency(rows, model.codebook().entries_tensor(), temperature, nullptr);
  return {f.values().begin(), f.values().end()};
}

// ---------------------------------------------------------------------------
// stage 1

MotionTrainer::MotionTrainer(const TrainConfig& cfg, std::vector<motion::MotionSequence> corpus)
    : cfg_(cfg), corpus_(std::move(corpus)) {
  cfg_.validate();
  if (corpus_.empty()) throw Error(ErrorCode::kEmptyDataset, "empty motion corpus");
  windows_ = checked_windows(lengths_of(corpus_), cfg_.window);
  const Rng root(cfg_.seed);
  model_ = model::MotionVqVae(cfg_, cfg_.seed);
  optimizer_ = g::AdamW(model_.parameters(), adamw_config(cfg_));
  sampler_ = BatchSampler(windows_.size(), cfg_.batch_size, root.split(100).seed());
  reinit_rng_ = root.split(102);
  gumbel_rng_ = root.split(103);
  zipf_ = zipf_for(cfg_);

  // k-means over the first batch's latents; the sampler is not advanced.
  BatchSampler peek = sampler_;
  const std::vector<std::size_t> first = peek.next();
  const Tensor rows = g::to_rows(model_.encode(motion_batch(corpus_, windows_, first, cfg_.window)).detach());
  Rng kmeans_rng = root.split(101);
  vq::kmeans_init(model_.codebook(), rows.values(), kmeans_rng, 10);

  report_.stage = "motion";
  start_ = std::chrono::steady_clock::now();
}

MotionTrainer::Pass MotionTrainer::forward(std::span<const std::size_t> pick, Rng& gumbel) const {
  const double lr = g::cosine_lr(std::min(optimizer_.step_count(), cfg_.total_steps), cfg_.total_steps,
                                 cfg_.lr_max, cfg_.lr_min);
  const Tensor x = motion_batch(corpus_, windows_, pick, cfg_.window);
  const Tensor rows = g::to_rows(model_.encode(x));
  const QuantizedRows q = quantize_rows(rows, model_.codebook());
  const Tensor recon = model_.decode(g::from_rows(g::straight_through(rows, q.codes), pick.size()));
  const vq::MotionLosses losses = vq::motion_vq_losses(x, recon, rows, q.codes, cfg_.weights);

  const Tensor freq =
      vq::batch_token_frequency(rows.detach(), model_.codebook().entries_tensor(), cfg_.gumbel_temperature, &gumbel);

  StepRecord r;
  r.step = optimizer_.step_count();
  r.lr = lr;
  r.scalars = {{"total", losses.total.item()},
               {"recon", losses.recon},
               {"commit", losses.commit},
               {"contact", losses.contact},
               {"slide", losses.slide},
               {"perplexity", vq::perplexity(q.tokens, model_.codebook().size())},
               {"js_motion_zipf", vq::js_divergence(freq.values(), zipf_)}};

  r.wall_seconds = seconds_since(start_);
  return {std::move(r), losses.total, rows, q.tokens};
}

StepRecord MotionTrainer::evaluate_next() const {
  BatchSampler peek = sampler_;
  Rng gumbel = gumbel_rng_;
  return forward(peek.next(), gumbel).record;
}

StepRecord MotionTrainer::step() {
  Pass p = forward(sampler_.next(), gumbel_rng_);
  g::backward(p.total);
  optimizer_.step(p.record.lr);
  vq::ema_update(model_.codebook(), p.rows.values(), p.tokens);
  const std::size_t revived = vq::reinit_dead_codes(model_.codebook(), p.rows.values(), reinit_rng_);
  p.record.scalars.emplace_back("revived", static_cast<double>(revived));
  report_.steps.push_back(p.record);
  return p.record;
}

void MotionTrainer::run(const StepCallback& on_step) { run_all(*this, cfg_.total_steps, on_step); }

ckpt::MotionCheckpoint MotionTrainer::checkpoint() const {
  ckpt::MotionCheckpoint c{cfg_, model_, optimizer_state(optimizer_)};
  // Detach from the live model so later steps do not leak into the snapshot.
  return ckpt::unpack_motion(ckpt::pack(c));
}

// ---------------------------------------------------------------------------
// stage 2

ImuTrainer::ImuTrainer(const TrainConfig& cfg, PairedCorpus corpus, const ckpt::MotionCheckpoint& motion)
    : cfg_(cfg), corpus_(std::move(corpus)) {
  cfg_.validate();
  const model::Architecture arch = motion.model.architecture();
  if (arch.latent != cfg_.latent_dim || arch.codebook_size != cfg_.codebook_size || arch.hidden != cfg_.hidden) {
    throw Error(ErrorCode::kCheckpointMismatch, "motion checkpoint d_z/K/hidden differ from the IMU config");
  }
  check_pairs(corpus_);
  motion_ = ckpt::unpack_motion(ckpt::pack(motion));  // private deep copy
  motion_.model.set_trainable(false);

  const imu::NormStats stats = imu::fit_norm_stats(corpus_.imu);
  normalized_ = normalize_all(corpus_.imu, stats);
  windows_ = checked_windows(lengths_of(corpus_.motion), cfg_.window);

  const Rng root(cfg_.seed);
  model_ = model::ImuTokenizer(cfg_, cfg_.seed, motion_.model);
  model_.set_stats(stats);
  model_.codebook().reset_entries(motion_.model.codebook().entries());
  optimizer_ = g::AdamW(model_.parameters(), adamw_config(cfg_));
  sampler_ = BatchSampler(windows_.size(), cfg_.batch_size, root.split(200).seed());
  reinit_rng_ = root.split(202);
  gumbel_rng_ = root.split(203);
  zipf_ = zipf_for(cfg_);
  report_.stage = "imu";
  start_ = std::chrono::steady_clock::now();
}

ImuTrainer::Pass ImuTrainer::forward(std::span<const std::size_t> pick, Rng& gumbel) const {
  const double lr = g::cosine_lr(std::min(optimizer_.step_count(), cfg_.total_steps), cfg_.total_steps,
                                 cfg_.lr_max, cfg_.lr_min);
  const Tensor xm = motion_batch(corpus_.motion, windows_, pick, cfg_.window);
  const Tensor xi = imu_batch(normalized_, windows_, pick, cfg_.window);

  const Tensor motion_rows = g::to_rows(motion_.model.encode(xm)).detach();
  const QuantizedRows mq = quantize_rows(motion_rows, motion_.model.codebook());
  const Tensor imu_rows = g::to_rows(model_.encode(xi));
  const QuantizedRows iq = quantize_rows(imu_rows, model_.codebook());

  const Tensor f_imu =
      vq::batch_token_frequency(imu_rows, model_.codebook().entries_tensor(), cfg_.gumbel_temperature, &gumbel);
  const Tensor f_motion = vq::batch_token_frequency(motion_rows, motion_.model.codebook().entries_tensor(),
                                                    cfg_.gumbel_temperature, &gumbel);
  const vq::ImuLosses losses =
      vq::imu_tokenizer_losses(imu_rows, iq.codes, mq.codes, f_imu, f_motion, zipf_, cfg_.weights);

  std::size_t agree = 0;
  for (std::size_t i = 0; i < iq.tokens.size(); ++i) agree += iq.tokens[i] == mq.tokens[i];

  StepRecord r;
  r.step = optimizer_.step_count();
  r.lr = lr;
  r.scalars = {{"total", losses.total.item()},
               {"code", losses.code},
               {"dist", losses.dist},
               {"js_imu_motion", losses.js_imu_motion},
               {"js_motion_zipf", losses.js_motion_zipf},
               {"perplexity", vq::perplexity(iq.tokens, model_.codebook().size())},
               {"token_agreement", static_cast<double>(agree) / static_cast<double>(iq.tokens.size())}};

  r.wall_seconds = seconds_since(start_);
  return {std::move(r), losses.total, imu_rows, iq.tokens};
}

StepRecord ImuTrainer::evaluate_next() const {
  BatchSampler peek = sampler_;
  Rng gumbel = gumbel_rng_;
  return forward(peek.next(), gumbel).record;
}

StepRecord ImuTrainer::step() {
  Pass p = forward(sampler_.next(), gumbel_rng_);
  g::backward(p.total);
  optimizer_.step(p.record.lr);
  vq::ema_update(model_.codebook(), p.rows.values(), p.tokens);
  const std::size_t revived = vq::reinit_dead_codes(model_.codebook(), p.rows.values(), reinit_rng_);
  p.record.scalars.emplace_back("revived", static_cast<double>(revived));
  report_.steps.push_back(p.record);
  return p.record;
}

void ImuTrainer::run(const StepCallback& on_step) { run_all(*this, cfg_.total_steps, on_step); }

ckpt::ImuCheckpoint ImuTrainer::checkpoint() const {
  ckpt::ImuCheckpoint c{cfg_, model_, optimizer_state(optimizer_)};
  return ckpt::unpack_imu(ckpt::pack(c));
}

// ---------------------------------------------------------------------------
// baseline

BaselineTrainer::BaselineTrainer(const TrainConfig& cfg, PairedCorpus corpus)
    : cfg_(cfg), corpus_(std::move(corpus)) {
  cfg_.validate();
  check_pairs(corpus_);
  const imu::NormStats stats = imu::fit_norm_stats(corpus_.imu);
  normalized_ = normalize_all(corpus_.imu, stats);
  windows_ = checked_windows(lengths_of(corpus_.motion), cfg_.window);
  const Rng root(cfg_.seed);
  model_ = model::BaselinePoser(cfg_, cfg_.seed);
  model_.set_stats(stats);
  optimizer_ = g::AdamW(model_.parameters(), adamw_config(cfg_));
  sampler_ = BatchSampler(windows_.size(), cfg_.batch_size, root.split(300).seed());
  report_.stage = "baseline";
  start_ = std::chrono::steady_clock::now();
}

BaselineTrainer::Pass BaselineTrainer::forward(std::span<const std::size_t> pick) const {
  const double lr = g::cosine_lr(std::min(optimizer_.step_count(), cfg_.total_steps), cfg_.total_steps,
                                 cfg_.lr_max, cfg_.lr_min);
  const Tensor xm = motion_batch(corpus_.motion, windows_, pick, cfg_.window);
  const Tensor xi = imu_batch(normalized_, windows_, pick, cfg_.window);
  const Tensor recon = g::mse(model_.forward(xi), xm);
  const Tensor total = g::scale(recon, cfg_.weights.recon);

  StepRecord r;
  r.step = optimizer_.step_count();
  r.lr = lr;
  r.scalars = {{"total", total.item()}, {"recon", recon.item()}};
  r.wall_seconds = seconds_since(start_);
  return {std::move(r), total};
}

StepRecord BaselineTrainer::evaluate_next() const {
  BatchSampler peek = sampler_;
  return forward(peek.next()).record;
}

StepRecord BaselineTrainer::step() {
  Pass p = forward(sampler_.next());
  g::backward(p.total);
  optimizer_.step(p.record.lr);
  report_.steps.push_back(p.record);
  return p.record;
}

void BaselineTrainer::run(const StepCallback& on_step) { run_all(*this, cfg_.total_steps, on_step); }

ckpt::BaselineCheckpoint BaselineTrainer::checkpoint() const {
  ckpt::BaselineCheckpoint c{cfg_, model_, optimizer_state(optimizer_)};
  return ckpt::unpack_baseline(ckpt::pack(c));
}

// ---------------------------------------------------------------------------

std::pair<ckpt::MotionCheckpoint, TrainReport> train_motion_vqvae(std::vector<motion::MotionSequence> corpus,
                                                                  const TrainConfig& cfg,
                                                                  const StepCallback& on_step) {
  MotionTrainer t(cfg, std::move(corpus));
  t.run(on_step);
  return {t.checkpoint(), t.report()};
}

std::pair<ckpt::ImuCheckpoint, TrainReport> train_imu_tokenizer(PairedCorpus corpus,
                                                                 const ckpt::MotionCheckpoint& motion,
                                                                 const TrainConfig& cfg,
                                                                 const StepCallback& on_step) {
  ImuTrainer t(cfg, std::move(corpus), motion);
  t.run(on_step);
  return {t.checkpoint(), t.report()};
}

std::pair<ckpt::BaselineCheckpoint, TrainReport> train_baseline(PairedCorpus corpus, const TrainConfig& cfg,
                                                                const StepCallback& on_step) {
  BaselineTrainer t(cfg, std::move(corpus));
  t.run(on_step);
  return {t.checkpoint(), t.report()};
}

}  // namespace jrtok::train
