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

#include <numeric>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "jrtok/gradnet/layers.hpp"
#include "jrtok/gradnet/ops.hpp"
#include "jrtok/motion.hpp"
#include "jrtok/rng.hpp"
#include "jrtok/vqcodec.hpp"

namespace testutil {

namespace g = jrtok::gradnet;
using jrtok::Rng;

/// One randomized gradient check; returns the relative error it measured.
struct GradCase {
  std::string name;
  std::function<double(Rng&)> run;
};

inline GradCheckStats& kink_tally() {
  thread_local GradCheckStats stats;
  return stats;
}

/// For piecewise-linear functions only (leaky ReLU stacks): between kinks
/// they are exactly linear in any one coordinate, so unequal one-sided
/// slopes identify a straddled kink. Those coordinates are skipped and
/// tallied.
inline double checked(const ScalarFn& f, std::vector<Tensor> leaves) {
  return gradcheck(f, std::move(leaves), 1e-4, &kink_tally());
}

inline Tensor rand_tensor(Rng& rng, g::Shape shape, bool grad = true, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(g::shape_size(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

/// Scalar <W, y> with a fixed random W, so every output element matters.
inline ScalarFn projected(std::function<Tensor(const std::vector<Tensor>&)> op, Rng& rng, g::Shape out_shape) {
  const Tensor w = rand_tensor(rng, std::move(out_shape), false);
  return [op, w](const std::vector<Tensor>& in) { return g::sum(g::mul(op(in), w)); };
}

inline double check_unary(Rng& rng, g::Shape shape, std::function<Tensor(const Tensor&)> op, g::Shape out_shape) {
  const Tensor x = rand_tensor(rng, shape);
  return gradcheck(projected([op](const std::vector<Tensor>& in) { return op(in[0]); }, rng, out_shape), {x});
}

inline double check_binary(Rng& rng, g::Shape shape, std::function<Tensor(const Tensor&, const Tensor&)> op) {
  const Tensor a = rand_tensor(rng, shape), b = rand_tensor(rng, shape);
  return gradcheck(projected([op](const std::vector<Tensor>& in) { return op(in[0], in[1]); }, rng, shape), {a, b});
}

/// Random [B, 271, T] target and reconstruction with contact channels in (0, 1).
inline std::pair<Tensor, Tensor> motion_pair(Rng& rng, std::size_t batch, std::size_t frames) {
  namespace ml = jrtok::motion::layout;
  Tensor target = rand_tensor(rng, {batch, ml::kWidth, frames}, false);
  Tensor recon = rand_tensor(rng, {batch, ml::kWidth, frames}, true);
  auto tv = target.mutable_values();
  auto rv = recon.mutable_values();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = ml::kContact; c < ml::kWidth; ++c)
      for (std::size_t t = 0; t < frames; ++t) {
        const std::size_t i = (b * ml::kWidth + c) * frames + t;
        tv[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
        rv[i] = rng.uniform(0.05, 0.95);
      }
  return {target, recon};
}

/// Straight-through: the tape gradient w.r.t. the latents must equal the
/// finite-difference gradient of the downstream loss w.r.t. the codes.
inline double straight_through_error(Tensor latents, Tensor codes, const ScalarFn& downstream,
                                     const std::function<Tensor(const Tensor&, const Tensor&)>& through) {
  latents.zero_grad();
  g::backward(through(latents, codes));
  const std::vector<double> analytic = latents.grad_or_zeros();
  Tensor codes_leaf = Tensor::from(codes.shape(), std::vector<double>(codes.values().begin(), codes.values().end()),
                                   true);
  std::vector<double> numeric(codes_leaf.numel());
  auto cv = codes_leaf.mutable_values();
  const double h = 1e-4;
  for (std::size_t i = 0; i < cv.size(); ++i) {
    const double keep = cv[i];
    cv[i] = keep + h;
    const double up = downstream({codes_leaf}).item();
    cv[i] = keep - h;
    const double down = downstream({codes_leaf}).item();
    cv[i] = keep;
    numeric[i] = (up - down) / (2 * h);
  }
  double diff = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
  double nn = 0.0;
  for (double v : numeric) nn += v * v;
  return nn < 1e-20 ? std::sqrt(diff) : std::sqrt(diff / nn);
}

inline std::vector<GradCase> gradient_cases() {
  using V = std::vector<Tensor>;
  std::vector<GradCase> cases;

  cases.push_back({"conv1d", [](Rng& rng) {
                     const bool strided = rng.uniform() < 0.5;
                     const std::size_t k = strided ? 4 : 3, stride = strided ? 2 : 1, len = 8;
                     const std::size_t out_len = (len + 2 - k) / stride + 1;
                     const Tensor x = rand_tensor(rng, {2, 3, len}), w = rand_tensor(rng, {4, 3, k}),
                                  b = rand_tensor(rng, {4});
                     return gradcheck(projected([=](const V& in) { return g::conv1d(in[0], in[1], in[2], stride, 1); },
                                                rng, {2, 4, out_len}),
                                      {x, w, b});
                   }});
  cases.push_back({"linear", [](Rng& rng) {
                     const Tensor x = rand_tensor(rng, {5, 4}), w = rand_tensor(rng, {3, 4}), b = rand_tensor(rng, {3});
                     return gradcheck(projected([](const V& in) { return g::linear(in[0], in[1], in[2]); }, rng, {5, 3}),
                                      {x, w, b});
                   }});
  cases.push_back({"upsample_nearest", [](Rng& rng) {
                     return check_unary(rng, {2, 3, 4}, [](const Tensor& x) { return g::upsample_nearest(x, 2); },
                                        {2, 3, 8});
                   }});
  cases.push_back({"leaky_relu", [](Rng& rng) {
                     const Tensor x = rand_tensor(rng, {3, 7});
                     return checked(projected([](const V& in) { return g::leaky_relu(in[0], 0.2); }, rng, {3, 7}), {x});
                   }});
  cases.push_back({"sigmoid", [](Rng& rng) {
                     return check_unary(rng, {3, 7}, [](const Tensor& x) { return g::sigmoid(g::scale(x, 3.0)); }, {3, 7});
                   }});
  cases.push_back({"add", [](Rng& rng) { return check_binary(rng, {4, 5}, g::add); }});
  cases.push_back({"sub", [](Rng& rng) { return check_binary(rng, {4, 5}, g::sub); }});
  cases.push_back({"mul", [](Rng& rng) { return check_binary(rng, {4, 5}, g::mul); }});
  cases.push_back({"scale", [](Rng& rng) {
                     const double s = rng.normal();
                     return check_unary(rng, {4, 5}, [s](const Tensor& x) { return g::scale(x, s); }, {4, 5});
                   }});
  cases.push_back({"sum", [](Rng& rng) {
                     return gradcheck([](const V& in) { return g::sum(in[0]); }, {rand_tensor(rng, {3, 4})});
                   }});
  cases.push_back({"mean", [](Rng& rng) {
                     return gradcheck([](const V& in) { return g::mean(in[0]); }, {rand_tensor(rng, {3, 4})});
                   }});
  cases.push_back({"sum_squares", [](Rng& rng) {
                     return gradcheck([](const V& in) { return g::sum_squares(in[0]); }, {rand_tensor(rng, {3, 4})});
                   }});
  cases.push_back({"weighted_sum", [](Rng& rng) {
                     const std::vector<double> w = {rng.normal(), rng.normal(), rng.normal()};
                     return gradcheck(
                         [w](const V& in) {
                           const V parts = {g::sum_squares(in[0]), g::sum(in[1]), g::mean(in[2])};
                           return g::weighted_sum(parts, w);
                         },
                         {rand_tensor(rng, {4}), rand_tensor(rng, {2, 2}), rand_tensor(rng, {3})});
                   }});
  cases.push_back({"mse", [](Rng& rng) {
                     return gradcheck([](const V& in) { return g::mse(in[0], in[1]); },
                                      {rand_tensor(rng, {2, 3, 4}), rand_tensor(rng, {2, 3, 4})});
                   }});
  cases.push_back({"bce_sum", [](Rng& rng) {
                     const Tensor p = rand_tensor(rng, {2, 4, 5}, true, 0.05, 0.95);
                     const Tensor y = rand_tensor(rng, {2, 4, 5}, false, 0.0, 1.0);
                     return gradcheck([y](const V& in) { return g::bce_sum(in[0], y); }, {p});
                   }});
  cases.push_back({"straight_through", [](Rng& rng) {
                     const Tensor z = rand_tensor(rng, {6, 3}), c = rand_tensor(rng, {6, 3}, false);
                     const Tensor w = rand_tensor(rng, {6, 3}, false);
                     const ScalarFn downstream = [w](const V& in) { return g::sum(g::mul(g::sigmoid(in[0]), w)); };
                     return straight_through_error(z, c, downstream, [&](const Tensor& zz, const Tensor& cc) {
                       return downstream({g::straight_through(zz, cc)});
                     });
                   }});
  cases.push_back({"to_rows", [](Rng& rng) {
                     return check_unary(rng, {2, 3, 4}, [](const Tensor& x) { return g::to_rows(x); }, {8, 3});
                   }});
  cases.push_back({"from_rows", [](Rng& rng) {
                     return check_unary(rng, {8, 3}, [](const Tensor& x) { return g::from_rows(x, 2); }, {2, 3, 4});
                   }});
  cases.push_back({"slice_channels", [](Rng& rng) {
                     return check_unary(rng, {2, 5, 3}, [](const Tensor& x) { return g::slice_channels(x, 1, 3); },
                                        {2, 3, 3});
                   }});
  cases.push_back({"concat_channels", [](Rng& rng) {
                     const Tensor a = rand_tensor(rng, {2, 2, 3}), b = rand_tensor(rng, {2, 3, 3});
                     return gradcheck(projected(
                                          [](const V& in) {
                                            const V parts = {in[0], in[1]};
                                            return g::concat_channels(parts);
                                          },
                                          rng, {2, 5, 3}),
                                      {a, b});
                   }});
  cases.push_back({"sum_channels", [](Rng& rng) {
                     return check_unary(rng, {2, 4, 3}, [](const Tensor& x) { return g::sum_channels(x); }, {2, 1, 3});
                   }});
  cases.push_back({"slice_time", [](Rng& rng) {
                     return check_unary(rng, {2, 3, 6}, [](const Tensor& x) { return g::slice_time(x, 2, 3); },
                                        {2, 3, 3});
                   }});
  cases.push_back({"squared_distances", [](Rng& rng) {
                     const Tensor r = rand_tensor(rng, {5, 3}), c = rand_tensor(rng, {4, 3});
                     return gradcheck(
                         projected([](const V& in) { return g::squared_distances(in[0], in[1]); }, rng, {5, 4}),
                         {r, c});
                   }});
  cases.push_back({"softmax_rows", [](Rng& rng) {
                     return check_unary(rng, {4, 6}, [](const Tensor& x) { return g::softmax_rows(x, 0.5); }, {4, 6});
                   }});
  cases.push_back({"mean_rows", [](Rng& rng) {
                     return check_unary(rng, {4, 6}, [](const Tensor& x) { return g::mean_rows(x); }, {6});
                   }});
  cases.push_back({"gather", [](Rng& rng) {
                     std::vector<std::size_t> idx(6);
                     std::iota(idx.begin(), idx.end(), 0);
                     for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.index(i + 1)]);
                     return check_unary(rng, {6}, [idx](const Tensor& x) { return g::gather(x, idx); }, {6});
                   }});
  cases.push_back({"js_divergence", [](Rng& rng) {
                     const Tensor p = rand_tensor(rng, {8}, true, 0.01, 1.0), q = rand_tensor(rng, {8}, true, 0.01, 1.0);
                     return gradcheck([](const V& in) { return g::js_divergence(in[0], in[1]); }, {p, q});
                   }});

  // Loss components.
  using jrtok::vq::LossWeights;
  auto motion_term = [](int which) {
    return [which](Rng& rng) {
      auto [target, recon] = motion_pair(rng, 2, 4);
      const Tensor z = rand_tensor(rng, {2, 5}), c = rand_tensor(rng, {2, 5}, false);
      return gradcheck(
          [target, c, which](const V& in) {
            LossWeights w;
            w.recon = which == 0 || which == 4 ? 1.0 : 0.0;
            w.commit = which == 1 || which == 4 ? 1.0 : 0.0;
            w.contact = which == 2 || which == 4 ? 1.0 : 0.0;
            w.slide = which == 3 || which == 4 ? 1.0 : 0.0;
            if (which == 4) w = LossWeights{};
            return jrtok::vq::motion_vq_losses(target, in[0], in[1], c, w).total;
          },
          {recon, z});
    };
  };
  cases.push_back({"loss_recon", motion_term(0)});
  cases.push_back({"loss_commit", motion_term(1)});
  cases.push_back({"loss_contact", motion_term(2)});
  cases.push_back({"loss_slide", motion_term(3)});
  cases.push_back({"loss_motion_total", motion_term(4)});

  cases.push_back({"loss_code", [](Rng& rng) {
                     const Tensor z = rand_tensor(rng, {6, 4}), c = rand_tensor(rng, {6, 4}, false);
                     const Tensor m = rand_tensor(rng, {6, 4}, false);
                     const Tensor f = Tensor::from({3}, {0.5, 0.3, 0.2});
                     const std::vector<double> zipf = {0.5, 0.3, 0.2};
                     LossWeights w;
                     w.dist = 0.0;
                     const ScalarFn downstream = [m](const V& in) {
                       return g::scale(g::sum_squares(g::sub(in[0], m)), 1.0 / 6.0);
                     };
                     return straight_through_error(z, c, downstream, [&](const Tensor& zz, const Tensor& cc) {
                       return jrtok::vq::imu_tokenizer_losses(zz, cc, m, f, f, zipf, w).total;
                     });
                   }});
  cases.push_back({"loss_dist", [](Rng& rng) {
                     const Tensor z = rand_tensor(rng, {6, 4}, false), c = rand_tensor(rng, {6, 4}, false);
                     const Tensor f_imu = rand_tensor(rng, {5}, true, 0.01, 1.0);
                     const Tensor f_motion = rand_tensor(rng, {5}, false, 0.01, 1.0);
                     const auto zipf = jrtok::vq::zipf_target({1.0, 2.7, 5});
                     LossWeights w;
                     w.code = 0.0;
                     return gradcheck(
                         [=](const V& in) {
                           return jrtok::vq::imu_tokenizer_losses(z, c, c, in[0], f_motion, zipf, w).total;
                         },
                         {f_imu});
                   }});
  cases.push_back({"gumbel_frequency", [](Rng& rng) {
                     const Tensor rows = rand_tensor(rng, {6, 3}), codes = rand_tensor(rng, {5, 3});
                     const std::uint64_t seed = rng.index(1u << 30);
                     const auto target = jrtok::vq::zipf_target({1.0, 2.7, 5});
                     const Tensor t = Tensor::from({5}, target);
                     return gradcheck(
                         [seed, t](const V& in) {
                           Rng noise(seed);
                           return g::js_divergence(jrtok::vq::batch_token_frequency(in[0], in[1], 0.5, &noise), t);
                         },
                         {rows, codes});
                   }});
  cases.push_back({"encoder_decoder", [](Rng& rng) {
                     Rng init(rng.index(1u << 30));
                     const g::NetShape shape{4, 3, 0.2};
                     const g::SequenceEncoder enc(5, shape, init);
                     const g::SequenceDecoder dec(2, shape, init);
                     std::vector<g::NamedParam> params;
                     enc.collect("enc", params);
                     dec.collect("dec", params);
                     V leaves{rand_tensor(rng, {1, 5, 8})};
                     for (auto& p : params) leaves.push_back(p.tensor);
                     return checked(projected([enc, dec](const V& in) { return dec.forward(enc.forward(in[0])); }, rng,
                                                {1, 2, 8}),
                                      leaves);
                   }});
  return cases;
}

}  // namespace testutil
