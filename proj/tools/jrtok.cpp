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

// jrtok command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "jrtok/binio.hpp"
#include "jrtok/checkpoint.hpp"
#include "jrtok/config.hpp"
#include "jrtok/error.hpp"
#include "jrtok/evalbench.hpp"
#include "jrtok/io.hpp"
#include "jrtok/stream.hpp"
#include "jrtok/trainer.hpp"

using namespace jrtok;

namespace {

TrainConfig load_config(const std::string& path) { return path.empty() ? TrainConfig{} : TrainConfig::load(path); }

train::PairedCorpus training_corpus(const TrainConfig& cfg) {
  return train::synthetic_corpus(cfg.corpus_sequences, cfg.corpus_duration, cfg.fps, cfg.seed);
}

// Logs every log_every steps to stderr and every step to the report file.
class StepLogger {
 public:
  StepLogger(const TrainConfig& cfg, std::string stage, const std::string& report_path)
      : every_(cfg.log_every), stage_(std::move(stage)) {
    if (!report_path.empty()) {
      file_.open(report_path);
      if (!file_) throw Error(ErrorCode::kIoError, "cannot create " + report_path);
    }
  }

  void operator()(const train::StepRecord& r) {
    if (file_.is_open()) file_ << r.to_json(stage_) << '\n';
    if (r.step % every_ == 0) {
      std::fprintf(stderr, "[%s] step %lld  lr %.3g  total %.6g  (%.1fs)\n", stage_.c_str(),
                   static_cast<long long>(r.step), r.lr, r.get("total"), r.wall_seconds);
    }
  }

 private:
  std::int64_t every_;
  std::string stage_;
  std::ofstream file_;
};

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad level list: " + text);
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  binio::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jitter-reduced tokenization of inertial motion signals"};
  app.require_subcommand(1);

  // synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic motion clip and its virtual IMU readings");
  std::uint64_t synth_seed = 0;
  double synth_duration = 8.0, synth_fps = 60.0;
  std::string synth_style = "walk", synth_motion, synth_imu;
  bool synth_no_drift = false;
  synth->add_option("--seed", synth_seed);
  synth->add_option("--duration", synth_duration, "seconds");
  synth->add_option("--fps", synth_fps);
  synth->add_option("--style", synth_style, "walk | squat | arm_raise | idle_sway");
  synth->add_option("--motion-out", synth_motion, "MJT1 motion file");
  synth->add_option("--imu-out", synth_imu, "MJI1 IMU file");
  synth->add_flag("--no-drift", synth_no_drift, "skip the simulated sensor drift");

  // config --------------------------------------------------------------
  auto* config = app.add_subcommand("config", "Print the default training configuration");

  // train ---------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Train a model on the synthetic corpus");
  train_cmd->require_subcommand(1);
  std::string cfg_path, out_path, report_path, motion_ckpt_path;
  auto add_train_opts = [&](CLI::App* sub, const char* default_out) {
    out_path = default_out;
    sub->add_option("--config", cfg_path, "key = value config file");
    sub->add_option("--out", out_path, "checkpoint path");
    sub->add_option("--report", report_path, "line-delimited JSON step log");
  };
  auto* train_motion = train_cmd->add_subcommand("motion", "Stage 1: motion VQ-VAE");
  add_train_opts(train_motion, "motion.mjc");
  auto* train_imu = train_cmd->add_subcommand("imu", "Stage 2: IMU tokenizer against a frozen motion model");
  add_train_opts(train_imu, "imu.mjc");
  train_imu->add_option("--motion-ckpt", motion_ckpt_path)->required();
  auto* train_base = train_cmd->add_subcommand("baseline", "Continuous regression baseline");
  add_train_opts(train_base, "baseline.mjc");

  // bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "Evaluation");
  bench->require_subcommand(1);
  auto* noise = bench->add_subcommand("noise", "Noise-robustness benchmark on held-out sequences");
  std::string imu_ckpt, motion_ckpt, baseline_ckpt, levels = "1,2,3", report_out = "report.mjr", table_out;
  std::uint64_t bench_seed = 0;
  std::size_t bench_count = 16;
  double bench_duration = 8.0;
  noise->add_option("--imu-ckpt", imu_ckpt)->required();
  noise->add_option("--motion-ckpt", motion_ckpt)->required();
  noise->add_option("--baseline-ckpt", baseline_ckpt)->required();
  noise->add_option("--levels", levels, "comma-separated corrupted-sensor counts");
  noise->add_option("--seed", bench_seed);
  noise->add_option("--sequences", bench_count, "held-out sequence count");
  noise->add_option("--duration", bench_duration, "seconds per held-out sequence");
  noise->add_option("--out", report_out, "JSON record file");
  noise->add_option("--table", table_out, "also write the text table here");

  // stream --------------------------------------------------------------
  auto* stream_cmd = app.add_subcommand("stream", "Tokenize and decode");
  stream_cmd->require_subcommand(1);
  std::string ckpt_path, imu_in, tokens_path, motion_out;
  std::size_t chunk = stream::kDefaultChunk;
  double pipe_fps = 60.0;
  bool smooth_root = false;
  auto* tokenize = stream_cmd->add_subcommand("tokenize", "IMU file -> token stream");
  tokenize->add_option("--imu", imu_in)->required();
  tokenize->add_option("--ckpt", ckpt_path, "IMU tokenizer checkpoint")->required();
  tokenize->add_option("--out", tokens_path)->required();
  tokenize->add_option("--chunk", chunk, "frames per chunk (multiple of 4)");
  auto* decode = stream_cmd->add_subcommand("decode", "token stream -> motion file");
  decode->add_option("--tokens", tokens_path)->required();
  decode->add_option("--ckpt", ckpt_path, "IMU tokenizer checkpoint")->required();
  decode->add_option("--out", motion_out)->required();
  decode->add_flag("--smooth-root", smooth_root, "exponential smoothing of the decoded root position");
  auto* pipe = stream_cmd->add_subcommand(
      "pipe", "stdin frame packets (u32 count, count x 72 f32) -> stdout token packets (u32 count, u16 ids)");
  pipe->add_option("--ckpt", ckpt_path, "IMU tokenizer checkpoint")->required();
  pipe->add_option("--fps", pipe_fps);
  pipe->add_option("--chunk", chunk, "frames per chunk (multiple of 4)");

  // inspect -------------------------------------------------------------
  auto* inspect = app.add_subcommand("inspect", "Describe a checkpoint or token stream");
  std::string inspect_path;
  inspect->add_option("path", inspect_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const auto& skel = motion::Skeleton::standard();
      const auto track =
          motion::generate_synthetic_motion(synth_seed, synth_duration, synth_fps, motion::style_from_string(synth_style));
      if (!synth_motion.empty()) io::save_motion(synth_motion, motion::build_motion_representation(track, skel));
      if (!synth_imu.empty()) {
        auto seq = imu::synthesize_imu(track, skel, imu::SensorPlacement::standard());
        if (!synth_no_drift) seq = imu::apply_drift(seq, imu::NoiseConfig::default_drift(synth_seed));
        io::save_imu(synth_imu, seq);
      }
      std::fprintf(stderr, "%zu frames\n", track.size());
    } else if (*config) {
      std::cout << TrainConfig{}.to_text();
    } else if (*train_motion) {
      const TrainConfig cfg = load_config(cfg_path);
      StepLogger log(cfg, "motion", report_path);
      const auto result = train::train_motion_vqvae(training_corpus(cfg).motion, cfg, std::ref(log));
      ckpt::save(out_path, result.first);
      std::fprintf(stderr, "wrote %s\n", out_path.c_str());
    } else if (*train_imu) {
      const TrainConfig cfg = load_config(cfg_path);
      const auto motion = ckpt::load_motion(motion_ckpt_path);
      StepLogger log(cfg, "imu", report_path);
      const auto result = train::train_imu_tokenizer(training_corpus(cfg), motion, cfg, std::ref(log));
      ckpt::save(out_path, result.first);
      std::fprintf(stderr, "wrote %s\n", out_path.c_str());
    } else if (*train_base) {
      const TrainConfig cfg = load_config(cfg_path);
      StepLogger log(cfg, "baseline", report_path);
      const auto result = train::train_baseline(training_corpus(cfg), cfg, std::ref(log));
      ckpt::save(out_path, result.first);
      std::fprintf(stderr, "wrote %s\n", out_path.c_str());
    } else if (*noise) {
      const auto imu_c = ckpt::load_imu(imu_ckpt);
      eval::BenchmarkOptions o;
      o.levels = parse_levels(levels);
      o.seed = bench_seed;
      const auto corpus = eval::heldout_corpus(bench_seed, bench_count, bench_duration, imu_c.config.fps);
      const auto report = eval::run_noise_benchmark(imu_c, ckpt::load_motion(motion_ckpt),
                                                    ckpt::load_baseline(baseline_ckpt), corpus, o);
      const std::string table = eval::render_table(report);
      std::cout << table;
      write_text(report_out, eval::to_record(report));
      if (!table_out.empty()) write_text(table_out, table);
    } else if (*tokenize) {
      const auto c = ckpt::load_imu(ckpt_path);
      stream::save_tokens(tokens_path, stream::tokenize_offline(c.model, io::load_imu(imu_in), chunk));
    } else if (*decode) {
      const auto c = ckpt::load_imu(ckpt_path);
      stream::DecodeOptions opts;
      opts.smooth_root = smooth_root;
      io::save_motion(motion_out, stream::decode_tokens(stream::load_tokens(tokens_path), c.model, opts));
    } else if (*pipe) {
      const auto c = ckpt::load_imu(ckpt_path);
      stream::StreamState state(c.model, chunk);
      std::ios::sync_with_stdio(false);
      while (auto packet = stream::read_frame_packet(std::cin, pipe_fps)) {
        const auto tokens = state.push_frames(*packet);
        stream::write_token_packet(std::cout, tokens);
        std::cout.flush();
      }
    } else if (*inspect) {
      const auto bytes = binio::read_file(inspect_path);
      if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "MJT2")) {
        const auto ts = stream::read_token_stream(bytes);
        std::cout << "token stream: " << ts.tokens.size() << " tokens, l=" << ts.compression
                  << ", K=" << ts.codebook_size << ", fps=" << ts.fps << ", start=" << ts.start_frame
                  << "\ncodebook " << to_hex(ts.codebook_digest) << "\n";
      } else {
        const auto data = ckpt::decode(bytes);
        std::cout << "checkpoint: " << model::to_string(data.kind) << ", step " << data.step << ", "
                  << data.records.size() << " records\narchitecture " << to_hex(data.architecture) << "\n";
        if (data.kind == model::ModelKind::kImuTokenizer) {
          std::cout << "codebook " << to_hex(ckpt::unpack_imu(data).model.codebook().digest()) << "\n";
        }
        std::cout << data.config_text;
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "jrtok: %s\n", e.what());
    return 1;
  }
  return 0;
}
