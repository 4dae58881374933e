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

// Python bindings. Sequences cross the boundary as float64 arrays of shape
// (frames, width): 271 motion channels, 72 IMU channels.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jrtok/checkpoint.hpp"
#include "jrtok/config.hpp"
#include "jrtok/error.hpp"
#include "jrtok/evalbench.hpp"
#include "jrtok/geom.hpp"
#include "jrtok/imusim.hpp"
#include "jrtok/motion.hpp"
#include "jrtok/stream.hpp"
#include "jrtok/trainer.hpp"
#include "jrtok/vqcodec.hpp"

namespace py = pybind11;
using namespace jrtok;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& flat, std::size_t width) {
  Array out({flat.size() / width, width});
  std::copy(flat.begin(), flat.end(), out.mutable_data());
  return out;
}

std::span<const double> rows_of(const Array& a, std::size_t width, const char* what) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != width)
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + " must have shape (frames, " + std::to_string(width) + ")");
  return {a.data(), static_cast<std::size_t>(a.size())};
}

motion::MotionSequence motion_from(const Array& a, double fps) {
  return motion::MotionSequence::unflatten(rows_of(a, motion::layout::kWidth, "motion"), fps);
}

imu::InertiaSequence imu_from(const Array& a, double fps) {
  return imu::InertiaSequence::unflatten(rows_of(a, imu::layout::kWidth, "imu"), fps);
}

Array motion_array(const motion::MotionSequence& s) { return to_array(s.flatten(), motion::layout::kWidth); }
Array imu_array(const imu::InertiaSequence& s) { return to_array(s.flatten(), imu::layout::kWidth); }

std::vector<std::vector<geom::Vec3>> positions_from(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw Error(ErrorCode::kShapeMismatch, "positions must be (frames, joints, 3)");
  const auto frames = static_cast<std::size_t>(a.shape(0)), joints = static_cast<std::size_t>(a.shape(1));
  std::vector<std::vector<geom::Vec3>> out(frames, std::vector<geom::Vec3>(joints));
  const double* p = a.data();
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t j = 0; j < joints; ++j, p += 3) out[t][j] = geom::Vec3(p[0], p[1], p[2]);
  return out;
}

std::vector<vq::Token> to_tokens(const std::vector<std::uint32_t>& ids) { return {ids.begin(), ids.end()}; }

train::StepCallback py_callback(const std::optional<std::function<void(py::dict)>>& cb) {
  if (!cb) return {};
  return [fn = *cb](const train::StepRecord& r) {
    py::gil_scoped_acquire gil;
    py::dict d;
    d["step"] = r.step;
    d["lr"] = r.lr;
    d["wall_s"] = r.wall_seconds;
    for (const auto& [k, v] : r.scalars) d[py::str(k)] = v;
    fn(d);
  };
}

py::dict report_dict(const eval::MetricReport& r) {
  py::list rows;
  for (const auto& row : r.rows) {
    py::dict d;
    d["method"] = row.method;
    d["noised"] = row.noised;
    d["mpjpe_cm"] = row.mpjpe;
    d["jitter"] = row.jitter;
    d["cases"] = row.cases;
    rows.append(d);
  }
  py::dict out;
  out["rows"] = rows;
  out["sequence_ids"] = r.sequence_ids;
  out["seed"] = r.seed;
  out["table"] = eval::render_table(r);
  return out;
}

}  // namespace

PYBIND11_MODULE(_jrtok, m) {
  m.doc() = "Tokenized IMU-to-motion pipeline: geometry, simulation, training, evaluation and streaming.";

  py::register_exception<Error>(m, "JrtokError", PyExc_RuntimeError);

  m.attr("MOTION_WIDTH") = motion::layout::kWidth;
  m.attr("IMU_WIDTH") = imu::layout::kWidth;

  // geometry
  m.def(
      "rot6d_to_matrix",
      [](const std::array<double, 6>& v) { return geom::rot6d_to_matrix(geom::Rot6D{v}); }, py::arg("rot6d"));
  m.def(
      "matrix_to_rot6d", [](const geom::Mat3& r) { return geom::matrix_to_rot6d(r).values; }, py::arg("matrix"));
  m.def("angular_velocity", &geom::angular_velocity, py::arg("prev"), py::arg("next"), py::arg("dt"),
        "Body-frame angular velocity taking prev to next in dt seconds.");

  // synthetic data
  m.def(
      "synthetic_motion",
      [](std::uint64_t seed, double duration, double fps, const std::string& style) {
        const auto track = motion::generate_synthetic_motion(seed, duration, fps, motion::style_from_string(style));
        return motion_array(motion::build_motion_representation(track, motion::Skeleton::standard()));
      },
      py::arg("seed"), py::arg("duration") = 8.0, py::arg("fps") = 60.0, py::arg("style") = "walk");
  m.def(
      "synthetic_imu",
      [](std::uint64_t seed, double duration, double fps, const std::string& style, bool drift) {
        const auto& skel = motion::Skeleton::standard();
        const auto track = motion::generate_synthetic_motion(seed, duration, fps, motion::style_from_string(style));
        auto seq = imu::synthesize_imu(track, skel, imu::SensorPlacement::standard());
        if (drift) seq = imu::apply_drift(seq, imu::NoiseConfig::default_drift(seed));
        return imu_array(seq);
      },
      py::arg("seed"), py::arg("duration") = 8.0, py::arg("fps") = 60.0, py::arg("style") = "walk",
      py::arg("drift") = true);
  m.def(
      "corrupt_imu",
      [](const Array& imu_frames, std::vector<int> sensors, double orientation, double acceleration, double gyro,
         std::uint64_t seed, double fps) {
        imu::NoiseConfig cfg;
        cfg.gaussian = {orientation, acceleration, gyro};
        cfg.corrupted_sensors = std::move(sensors);
        cfg.seed = seed;
        return imu_array(imu::apply_corruption(imu_from(imu_frames, fps), cfg));
      },
      py::arg("imu"), py::arg("sensors"), py::arg("orientation") = eval::kBenchmarkNoise.orientation,
      py::arg("acceleration") = eval::kBenchmarkNoise.acceleration, py::arg("gyro") = eval::kBenchmarkNoise.gyro,
      py::arg("seed") = 0, py::arg("fps") = 60.0);
  m.def(
      "joint_positions",
      [](const Array& motion_frames, double fps) {
        const auto pos = motion::joint_positions(motion_from(motion_frames, fps), motion::Skeleton::standard());
        const std::size_t joints = pos.empty() ? 0 : pos[0].size();
        py::array_t<double> out({pos.size(), joints, std::size_t{3}});
        double* p = out.mutable_data();
        for (const auto& frame : pos)
          for (const auto& v : frame) {
            *p++ = v.x();
            *p++ = v.y();
            *p++ = v.z();
          }
        return out;
      },
      py::arg("motion"), py::arg("fps") = 60.0, "World joint positions, shape (frames, joints, 3).");

  // codebook utilities
  m.def(
      "quantize",
      [](const Array& latents, const Array& codebook) {
        if (latents.ndim() != 2 || codebook.ndim() != 2 || latents.shape(1) != codebook.shape(1))
          throw Error(ErrorCode::kShapeMismatch, "latents (N, d) and codebook (K, d) required");
        const auto k = static_cast<std::size_t>(codebook.shape(0)), d = static_cast<std::size_t>(codebook.shape(1));
        Rng rng(0);
        vq::Codebook cb(k, d, 0.99, rng);
        cb.reset_entries(std::span(codebook.data(), k * d));
        const auto q = vq::quantize(std::span(latents.data(), static_cast<std::size_t>(latents.size())), cb);
        return std::vector<std::uint32_t>(q.indices.begin(), q.indices.end());
      },
      py::arg("latents"), py::arg("codebook"), "Nearest-entry indices; ties go to the lowest index.");
  m.def(
      "zipf_target", [](std::size_t k, double alpha, double beta) { return vq::zipf_target({alpha, beta, k}); },
      py::arg("size"), py::arg("alpha") = 1.0, py::arg("beta") = 2.7);
  m.def(
      "js_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q) { return vq::js_divergence(p, q); },
      py::arg("p"), py::arg("q"), "Jensen-Shannon divergence in nats.");
  m.def(
      "perplexity",
      [](const std::vector<std::uint32_t>& ids, std::size_t k) { return vq::perplexity(to_tokens(ids), k); },
      py::arg("tokens"), py::arg("codebook_size"));

  // metrics
  m.def(
      "mpjpe", [](const Array& pred, const Array& gt) { return eval::mpjpe(positions_from(pred), positions_from(gt)); },
      py::arg("pred"), py::arg("gt"), "Mean per-joint position error in cm over (frames, joints, 3) arrays.");
  m.def(
      "jitter", [](const Array& positions, double fps) { return eval::jitter(positions_from(positions), fps); },
      py::arg("positions"), py::arg("fps") = 60.0, "Mean jerk magnitude in 1e2 m/s^3.");

  // configuration
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_static("parse", &TrainConfig::parse, py::arg("text"))
      .def_static("load", &TrainConfig::load, py::arg("path"))
      .def("to_text", &TrainConfig::to_text)
      .def("validate", &TrainConfig::validate)
      .def_readwrite("codebook_size", &TrainConfig::codebook_size)
      .def_readwrite("latent_dim", &TrainConfig::latent_dim)
      .def_readwrite("hidden", &TrainConfig::hidden)
      .def_readwrite("compression", &TrainConfig::compression)
      .def_readwrite("gamma", &TrainConfig::gamma)
      .def_readwrite("lr_max", &TrainConfig::lr_max)
      .def_readwrite("lr_min", &TrainConfig::lr_min)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("total_steps", &TrainConfig::total_steps)
      .def_readwrite("window", &TrainConfig::window)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("fps", &TrainConfig::fps)
      .def_readwrite("gumbel_temperature", &TrainConfig::gumbel_temperature)
      .def_readwrite("corpus_sequences", &TrainConfig::corpus_sequences)
      .def_readwrite("corpus_duration", &TrainConfig::corpus_duration)
      .def_readwrite("log_every", &TrainConfig::log_every)
      .def("__repr__", [](const TrainConfig& c) { return "TrainConfig(\n" + c.to_text() + ")"; });

  // models
  py::class_<ckpt::MotionCheckpoint>(m, "MotionCheckpoint")
      .def_readonly("config", &ckpt::MotionCheckpoint::config)
      .def("save", [](const ckpt::MotionCheckpoint& c, const std::string& path) { ckpt::save(path, c); })
      .def_static("load", &ckpt::load_motion, py::arg("path"))
      .def(
          "reconstruct",
          [](const ckpt::MotionCheckpoint& c, const Array& motion_frames) {
            return motion_array(c.model.reconstruct(motion_from(motion_frames, c.config.fps)));
          },
          py::arg("motion"))
      .def(
          "tokenize",
          [](const ckpt::MotionCheckpoint& c, const Array& motion_frames) {
            const auto t = c.model.tokenize(motion_from(motion_frames, c.config.fps));
            return std::vector<std::uint32_t>(t.begin(), t.end());
          },
          py::arg("motion"))
      .def_property_readonly("codebook_digest",
                             [](const ckpt::MotionCheckpoint& c) { return to_hex(c.model.codebook().digest()); });

  py::class_<ckpt::ImuCheckpoint>(m, "ImuCheckpoint")
      .def_readonly("config", &ckpt::ImuCheckpoint::config)
      .def("save", [](const ckpt::ImuCheckpoint& c, const std::string& path) { ckpt::save(path, c); })
      .def_static("load", &ckpt::load_imu, py::arg("path"))
      .def(
          "tokenize",
          [](const ckpt::ImuCheckpoint& c, const Array& imu_frames) {
            const auto t = c.model.tokenize(imu_from(imu_frames, c.config.fps));
            return std::vector<std::uint32_t>(t.begin(), t.end());
          },
          py::arg("imu"), "Tokens for raw (unnormalized) IMU frames; 4 frames per token.")
      .def(
          "decode_tokens",
          [](const ckpt::ImuCheckpoint& c, const std::vector<std::uint32_t>& ids) {
            return motion_array(c.model.decode_tokens(to_tokens(ids), c.config.fps));
          },
          py::arg("tokens"))
      .def_property_readonly("codebook_digest",
                             [](const ckpt::ImuCheckpoint& c) { return to_hex(c.model.codebook().digest()); });

  py::class_<ckpt::BaselineCheckpoint>(m, "BaselineCheckpoint")
      .def_readonly("config", &ckpt::BaselineCheckpoint::config)
      .def("save", [](const ckpt::BaselineCheckpoint& c, const std::string& path) { ckpt::save(path, c); })
      .def_static("load", &ckpt::load_baseline, py::arg("path"))
      .def(
          "predict",
          [](const ckpt::BaselineCheckpoint& c, const Array& imu_frames) {
            return motion_array(c.model.predict(imu_from(imu_frames, c.config.fps)));
          },
          py::arg("imu"));

  // training on the synthetic corpus described by the config
  auto corpus_of = [](const TrainConfig& cfg) {
    return train::synthetic_corpus(cfg.corpus_sequences, cfg.corpus_duration, cfg.fps, cfg.seed);
  };
  m.def(
      "train_motion",
      [corpus_of](const TrainConfig& cfg, const std::optional<std::function<void(py::dict)>>& on_step) {
        const auto corpus = corpus_of(cfg);
        py::gil_scoped_release nogil;
        return train::train_motion_vqvae(corpus.motion, cfg, py_callback(on_step)).first;
      },
      py::arg("config"), py::arg("on_step") = py::none());
  m.def(
      "train_imu",
      [corpus_of](const TrainConfig& cfg, const ckpt::MotionCheckpoint& motion,
                  const std::optional<std::function<void(py::dict)>>& on_step) {
        const auto corpus = corpus_of(cfg);
        py::gil_scoped_release nogil;
        return train::train_imu_tokenizer(corpus, motion, cfg, py_callback(on_step)).first;
      },
      py::arg("config"), py::arg("motion"), py::arg("on_step") = py::none());
  m.def(
      "train_baseline",
      [corpus_of](const TrainConfig& cfg, const std::optional<std::function<void(py::dict)>>& on_step) {
        const auto corpus = corpus_of(cfg);
        py::gil_scoped_release nogil;
        return train::train_baseline(corpus, cfg, py_callback(on_step)).first;
      },
      py::arg("config"), py::arg("on_step") = py::none());

  // evaluation
  m.def(
      "noise_benchmark",
      [](const ckpt::ImuCheckpoint& imu_c, const ckpt::MotionCheckpoint& motion_c,
         const ckpt::BaselineCheckpoint& base_c, std::vector<int> levels, std::uint64_t seed, std::size_t sequences,
         double duration) {
        eval::BenchmarkOptions o;
        o.levels = std::move(levels);
        o.seed = seed;
        const auto corpus = eval::heldout_corpus(seed, sequences, duration, imu_c.config.fps);
        eval::MetricReport report;
        {
          py::gil_scoped_release nogil;
          report = eval::run_noise_benchmark(imu_c, motion_c, base_c, corpus, o);
        }
        return report_dict(report);
      },
      py::arg("imu"), py::arg("motion"), py::arg("baseline"), py::arg("levels") = std::vector<int>{1, 2, 3},
      py::arg("seed") = 0, py::arg("sequences") = 16, py::arg("duration") = 8.0);

  // streaming
  py::class_<stream::TokenSequence>(m, "TokenSequence")
      .def_readonly("tokens", &stream::TokenSequence::tokens)
      .def_readonly("compression", &stream::TokenSequence::compression)
      .def_readonly("codebook_size", &stream::TokenSequence::codebook_size)
      .def_readonly("fps", &stream::TokenSequence::fps)
      .def_readonly("start_frame", &stream::TokenSequence::start_frame)
      .def_property_readonly("codebook_digest",
                             [](const stream::TokenSequence& s) { return to_hex(s.codebook_digest); })
      .def("to_bytes",
           [](const stream::TokenSequence& s) {
             const auto b = stream::write_token_stream(s);
             return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
           })
      .def_static(
          "from_bytes",
          [](const py::bytes& data) {
            const std::string_view v = data;
            return stream::read_token_stream(
                std::span(reinterpret_cast<const std::uint8_t*>(v.data()), v.size()));
          },
          py::arg("data"))
      .def("__eq__", [](const stream::TokenSequence& a, const stream::TokenSequence& b) { return a == b; })
      .def("__len__", [](const stream::TokenSequence& s) { return s.tokens.size(); });

  m.def(
      "tokenize_offline",
      [](const ckpt::ImuCheckpoint& c, const Array& imu_frames, std::size_t chunk) {
        return stream::tokenize_offline(c.model, imu_from(imu_frames, c.config.fps), chunk);
      },
      py::arg("imu_checkpoint"), py::arg("imu"), py::arg("chunk") = stream::kDefaultChunk);
  m.def(
      "decode_stream",
      [](const stream::TokenSequence& seq, const ckpt::ImuCheckpoint& c, bool smooth_root) {
        stream::DecodeOptions o;
        o.smooth_root = smooth_root;
        return motion_array(stream::decode_tokens(seq, c.model, o));
      },
      py::arg("tokens"), py::arg("imu_checkpoint"), py::arg("smooth_root") = false);

  // Holds its own copy of the tokenizer so the checkpoint may go away.
  struct PyStream {
    ckpt::ImuCheckpoint checkpoint;
    stream::StreamState state;
    PyStream(const ckpt::ImuCheckpoint& c, std::size_t chunk) : checkpoint(c), state(checkpoint.model, chunk) {}
  };
  py::class_<PyStream>(m, "StreamState")
      .def(py::init<const ckpt::ImuCheckpoint&, std::size_t>(), py::arg("imu_checkpoint"),
           py::arg("chunk") = stream::kDefaultChunk)
      .def(
          "push_frames",
          [](PyStream& s, const Array& imu_frames) {
            return s.state.push_frames(imu_from(imu_frames, s.checkpoint.config.fps));
          },
          py::arg("imu"), "Tokens for every chunk completed by these frames.")
      .def_property_readonly("buffered", [](const PyStream& s) { return s.state.buffered(); })
      .def_property_readonly("frames_seen", [](const PyStream& s) { return s.state.frames_seen(); })
      .def("emitted", [](const PyStream& s) { return s.state.emitted(); });
}
