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

#include "jrtok/gradnet/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "jrtok/error.hpp"

namespace jrtok::gradnet {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

using detail::Node;

[[noreturn]] void shape_error(const char* op, const Tensor& a) {
  throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": unexpected shape " + shape_string(a.shape()));
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) shape_error(op, a);
}

bool wants(const Node& self, std::size_t i) { return self.inputs[i]->requires_grad; }
std::vector<double>& grad_of(Node& self, std::size_t i) { return self.inputs[i]->grad_buffer(); }

Tensor unary(const Tensor& x, std::vector<double> value, std::function<void(Node&)> bwd) {
  return make_result(x.shape(), std::move(value), {x}, std::move(bwd));
}

}  // namespace

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride, std::size_t padding) {
  require_rank("conv1d", x, 3);
  require_rank("conv1d", weight, 3);
  const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const std::size_t cout = weight.dim(0), kernel = weight.dim(2);
  if (weight.dim(1) != cin) shape_error("conv1d (input channels)", x);
  if (bias.numel() != cout) shape_error("conv1d (bias)", bias);
  if (stride == 0) throw Error(ErrorCode::kInvalidArgument, "conv1d stride must be >= 1");
  if (len + 2 * padding < kernel) shape_error("conv1d (sequence shorter than kernel)", x);
  const std::size_t out_len = (len + 2 * padding - kernel) / stride + 1;
  const std::size_t cols = batch * out_len;
  const std::size_t rows = cin * kernel;

  // im2col: column (b, t) holds the receptive field of output step t.
  auto col = std::make_shared<std::vector<double>>(rows * cols, 0.0);
  const auto xv = x.values();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* xrow = xv.data() + (b * cin + ci) * len;
      for (std::size_t k = 0; k < kernel; ++k) {
        double* crow = col->data() + (ci * kernel + k) * cols + b * out_len;
        for (std::size_t t = 0; t < out_len; ++t) {
          const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t * stride + k) - static_cast<std::ptrdiff_t>(padding);
          if (src >= 0 && src < static_cast<std::ptrdiff_t>(len)) crow[t] = xrow[src];
        }
      }
    }
  }
  const ConstMapMat w(weight.values().data(), cout, rows);
  const ConstMapMat c(col->data(), rows, cols);
  RowMat y = w * c;
  std::vector<double> out(batch * cout * out_len);
  const auto bv = bias.values();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      double* orow = out.data() + (b * cout + co) * out_len;
      for (std::size_t t = 0; t < out_len; ++t) orow[t] = y(co, b * out_len + t) + bv[co];
    }
  }

  return make_result(
      {batch, cout, out_len}, std::move(out), {x, weight, bias},
      [=](Node& self) {
        RowMat dy(cout, cols);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t co = 0; co < cout; ++co) {
            const double* g = self.grad.data() + (b * cout + co) * out_len;
            for (std::size_t t = 0; t < out_len; ++t) dy(co, b * out_len + t) = g[t];
          }
        }
        const ConstMapMat cm(col->data(), rows, cols);
        if (wants(self, 1)) {
          MapMat dw(grad_of(self, 1).data(), cout, rows);
          dw.noalias() += dy * cm.transpose();
        }
        if (wants(self, 2)) {
          auto& db = grad_of(self, 2);
          for (std::size_t co = 0; co < cout; ++co) db[co] += dy.row(co).sum();
        }
        if (wants(self, 0)) {
          const ConstMapMat wm(self.inputs[1]->value.data(), cout, rows);
          const RowMat dcol = wm.transpose() * dy;
          auto& dx = grad_of(self, 0);
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t ci = 0; ci < cin; ++ci) {
              double* dxrow = dx.data() + (b * cin + ci) * len;
              for (std::size_t k = 0; k < kernel; ++k) {
                const double* drow = dcol.data() + (ci * kernel + k) * cols + b * out_len;
                for (std::size_t t = 0; t < out_len; ++t) {
                  const std::ptrdiff_t src =
                      static_cast<std::ptrdiff_t>(t * stride + k) - static_cast<std::ptrdiff_t>(padding);
                  if (src >= 0 && src < static_cast<std::ptrdiff_t>(len)) dxrow[src] += drow[t];
                }
              }
            }
          }
        }
      });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank("linear", x, 2);
  require_rank("linear", weight, 2);
  const std::size_t n = x.dim(0), in = x.dim(1), out = weight.dim(0);
  if (weight.dim(1) != in) shape_error("linear (input features)", x);
  if (bias.numel() != out) shape_error("linear (bias)", bias);
  const ConstMapMat xm(x.values().data(), n, in);
  const ConstMapMat wm(weight.values().data(), out, in);
  RowMat y = xm * wm.transpose();
  const auto bv = bias.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < out; ++o) y(i, o) += bv[o];
  }
  std::vector<double> value(y.data(), y.data() + n * out);
  return make_result({n, out}, std::move(value), {x, weight, bias}, [=](Node& self) {
    const ConstMapMat dy(self.grad.data(), n, out);
    if (wants(self, 0)) {
      MapMat dx(grad_of(self, 0).data(), n, in);
      dx.noalias() += dy * ConstMapMat(self.inputs[1]->value.data(), out, in);
    }
    if (wants(self, 1)) {
      MapMat dw(grad_of(self, 1).data(), out, in);
      dw.noalias() += dy.transpose() * ConstMapMat(self.inputs[0]->value.data(), n, in);
    }
    if (wants(self, 2)) {
      auto& db = grad_of(self, 2);
      for (std::size_t o = 0; o < out; ++o) db[o] += dy.col(o).sum();
    }
  });
}

Tensor upsample_nearest(const Tensor& x, std::size_t factor) {
  require_rank("upsample_nearest", x, 3);
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  std::vector<double> out(rows * len * factor);
  const auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t f = 0; f < factor; ++f) out[(r * len + t) * factor + f] = xv[r * len + t];
    }
  }
  return make_result({x.dim(0), x.dim(1), len * factor}, std::move(out), {x}, [=](Node& self) {
    auto& dx = grad_of(self, 0);
    for (std::size_t i = 0; i < rows * len; ++i) {
      for (std::size_t f = 0; f < factor; ++f) dx[i] += self.grad[i * factor + f];
    }
  });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v = v > 0.0 ? v : slope * v;
  return unary(x, std::move(out), [slope](Node& self) {
    auto& dx = grad_of(self, 0);
    const auto& xv = self.inputs[0]->value;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i] * (xv[i] > 0.0 ? 1.0 : slope);
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  return unary(x, std::move(out), [](Node& self) {
    auto& dx = grad_of(self, 0);
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double y = self.value[i];
      dx[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same("add", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (!wants(self, k)) continue;
      auto& d = grad_of(self, k);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same("sub", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (wants(self, 0)) {
      auto& d = grad_of(self, 0);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
    }
    if (wants(self, 1)) {
      auto& d = grad_of(self, 1);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same("mul", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    if (wants(self, 0)) {
      auto& d = grad_of(self, 0);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * bv[i];
    }
    if (wants(self, 1)) {
      auto& d = grad_of(self, 1);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v *= factor;
  return unary(x, std::move(out), [factor](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * factor;
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_result({1}, {s}, {x}, [](Node& self) {
    auto& d = grad_of(self, 0);
    for (double& g : d) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor sum_squares(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v * v;
  return make_result({1}, {s}, {x}, [](Node& self) {
    auto& d = grad_of(self, 0);
    const auto& xv = self.inputs[0]->value;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += 2.0 * xv[i] * self.grad[0];
  });
}

Tensor weighted_sum(std::span<const Tensor> scalars, std::span<const double> weights) {
  if (scalars.size() != weights.size()) throw Error(ErrorCode::kShapeMismatch, "weighted_sum: size mismatch");
  double s = 0.0;
  std::vector<Tensor> inputs;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    s += weights[i] * scalars[i].item();
    inputs.push_back(scalars[i]);
  }
  std::vector<double> w(weights.begin(), weights.end());
  return make_result({1}, {s}, std::move(inputs), [w](Node& self) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (wants(self, i)) grad_of(self, i)[0] += w[i] * self.grad[0];
    }
  });
}

Tensor mse(const Tensor& a, const Tensor& b) {
  require_same("mse", a, b);
  const double n = static_cast<double>(a.numel());
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = a.at(i) - b.at(i);
    s += d * d;
  }
  return make_result({1}, {s / n}, {a, b}, [n](Node& self) {
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    const double g = 2.0 * self.grad[0] / n;
    if (wants(self, 0)) {
      auto& d = grad_of(self, 0);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g * (av[i] - bv[i]);
    }
    if (wants(self, 1)) {
      auto& d = grad_of(self, 1);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g * (av[i] - bv[i]);
    }
  });
}

Tensor bce_sum(const Tensor& prediction, const Tensor& target, double eps) {
  require_same("bce_sum", prediction, target);
  double s = 0.0;
  for (std::size_t i = 0; i < prediction.numel(); ++i) {
    const double p = std::clamp(prediction.at(i), eps, 1.0 - eps);
    const double t = target.at(i);
    s -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  const Tensor fixed = target.detach();
  return make_result({1}, {s}, {prediction, fixed}, [eps](Node& self) {
    if (!wants(self, 0)) return;
    auto& d = grad_of(self, 0);
    const auto& pv = self.inputs[0]->value;
    const auto& tv = self.inputs[1]->value;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double p = pv[i];
      if (p <= eps || p >= 1.0 - eps) continue;
      d[i] += self.grad[0] * (-tv[i] / p + (1.0 - tv[i]) / (1.0 - p));
    }
  });
}

Tensor stop_gradient(const Tensor& x) { return x.detach(); }

Tensor straight_through(const Tensor& latents, const Tensor& codes) {
  require_same("straight_through", latents, codes);
  std::vector<double> out(codes.values().begin(), codes.values().end());
  return make_result(latents.shape(), std::move(out), {latents}, [](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
  });
}

Tensor to_rows(const Tensor& x) {
  require_rank("to_rows", x, 3);
  const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  std::vector<double> out(x.numel());
  const auto xv = x.values();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t t = 0; t < len; ++t) out[(b * len + t) * ch + c] = xv[(b * ch + c) * len + t];
    }
  }
  return make_result({batch * len, ch}, std::move(out), {x}, [=](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t t = 0; t < len; ++t) d[(b * ch + c) * len + t] += self.grad[(b * len + t) * ch + c];
      }
    }
  });
}

Tensor from_rows(const Tensor& rows, std::size_t batch) {
  require_rank("from_rows", rows, 2);
  if (batch == 0 || rows.dim(0) % batch != 0) shape_error("from_rows", rows);
  const std::size_t len = rows.dim(0) / batch, ch = rows.dim(1);
  std::vector<double> out(rows.numel());
  const auto rv = rows.values();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t t = 0; t < len; ++t) out[(b * ch + c) * len + t] = rv[(b * len + t) * ch + c];
    }
  }
  return make_result({batch, ch, len}, std::move(out), {rows}, [=](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t t = 0; t < len; ++t) d[(b * len + t) * ch + c] += self.grad[(b * ch + c) * len + t];
      }
    }
  });
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t count) {
  require_rank("slice_channels", x, 3);
  const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  if (begin + count > ch) shape_error("slice_channels", x);
  std::vector<double> out(batch * count * len);
  const auto xv = x.values();
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(xv.begin() + (b * ch + begin) * len, count * len, out.begin() + b * count * len);
  }
  return make_result({batch, count, len}, std::move(out), {x}, [=](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < count * len; ++i) d[(b * ch + begin) * len + i] += self.grad[b * count * len + i];
    }
  });
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw Error(ErrorCode::kShapeMismatch, "concat_channels: no inputs");
  const std::size_t batch = parts[0].dim(0), len = parts[0].dim(2);
  std::size_t ch = 0;
  std::vector<std::size_t> offsets;
  for (const Tensor& p : parts) {
    require_rank("concat_channels", p, 3);
    if (p.dim(0) != batch || p.dim(2) != len) shape_error("concat_channels", p);
    offsets.push_back(ch);
    ch += p.dim(1);
  }
  std::vector<double> out(batch * ch * len);
  std::vector<std::size_t> widths;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::size_t w = parts[i].dim(1);
    widths.push_back(w);
    const auto pv = parts[i].values();
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy_n(pv.begin() + b * w * len, w * len, out.begin() + (b * ch + offsets[i]) * len);
    }
  }
  return make_result({batch, ch, len}, std::move(out), std::vector<Tensor>(parts.begin(), parts.end()),
                     [=](Node& self) {
                       for (std::size_t i = 0; i < widths.size(); ++i) {
                         if (!wants(self, i)) continue;
                         auto& d = grad_of(self, i);
                         const std::size_t w = widths[i];
                         for (std::size_t b = 0; b < batch; ++b) {
                           for (std::size_t k = 0; k < w * len; ++k) {
                             d[b * w * len + k] += self.grad[(b * ch + offsets[i]) * len + k];
                           }
                         }
                       }
                     });
}

Tensor sum_channels(const Tensor& x) {
  require_rank("sum_channels", x, 3);
  const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  std::vector<double> out(batch * len, 0.0);
  const auto xv = x.values();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t t = 0; t < len; ++t) out[b * len + t] += xv[(b * ch + c) * len + t];
    }
  }
  return make_result({batch, 1, len}, std::move(out), {x}, [=](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t t = 0; t < len; ++t) d[(b * ch + c) * len + t] += self.grad[b * len + t];
      }
    }
  });
}

Tensor slice_time(const Tensor& x, std::size_t begin, std::size_t length) {
  require_rank("slice_time", x, 3);
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  if (begin + length > len) shape_error("slice_time", x);
  std::vector<double> out(rows * length);
  const auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(xv.begin() + r * len + begin, length, out.begin() + r * length);
  return make_result({x.dim(0), x.dim(1), length}, std::move(out), {x}, [=](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t t = 0; t < length; ++t) d[r * len + begin + t] += self.grad[r * length + t];
    }
  });
}

Tensor squared_distances(const Tensor& rows, const Tensor& codes) {
  require_rank("squared_distances", rows, 2);
  require_rank("squared_distances", codes, 2);
  const std::size_t n = rows.dim(0), dim = rows.dim(1), k = codes.dim(0);
  if (codes.dim(1) != dim) shape_error("squared_distances (feature width)", codes);
  std::vector<double> out(n * k);
  const auto rv = rows.values();
  const auto cv = codes.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = rv[i * dim + d] - cv[j * dim + d];
        s += diff * diff;
      }
      out[i * k + j] = s;
    }
  }
  return make_result({n, k}, std::move(out), {rows, codes}, [=](Node& self) {
    const auto& r = self.inputs[0]->value;
    const auto& c = self.inputs[1]->value;
    const bool want_r = wants(self, 0), want_c = wants(self, 1);
    std::vector<double>* dr = want_r ? &grad_of(self, 0) : nullptr;
    std::vector<double>* dc = want_c ? &grad_of(self, 1) : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double g = 2.0 * self.grad[i * k + j];
        if (g == 0.0) continue;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = g * (r[i * dim + d] - c[j * dim + d]);
          if (dr) (*dr)[i * dim + d] += diff;
          if (dc) (*dc)[j * dim + d] -= diff;
        }
      }
    }
  });
}

Tensor softmax_rows(const Tensor& x, double temperature) {
  require_rank("softmax_rows", x, 2);
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "softmax temperature must be positive");
  const std::size_t n = x.dim(0), k = x.dim(1);
  std::vector<double> out(n * k);
  const auto xv = x.values();
  for (std::size_t i = 0; i < n; ++i) {
    double hi = xv[i * k];
    for (std::size_t j = 1; j < k; ++j) hi = std::max(hi, xv[i * k + j]);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[i * k + j] = std::exp((xv[i * k + j] - hi) / temperature);
      total += out[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] /= total;
  }
  return make_result({n, k}, std::move(out), {x}, [=](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) dot += self.grad[i * k + j] * self.value[i * k + j];
      for (std::size_t j = 0; j < k; ++j) {
        d[i * k + j] += self.value[i * k + j] * (self.grad[i * k + j] - dot) / temperature;
      }
    }
  });
}

Tensor mean_rows(const Tensor& x) {
  require_rank("mean_rows", x, 2);
  const std::size_t n = x.dim(0), k = x.dim(1);
  std::vector<double> out(k, 0.0);
  const auto xv = x.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) out[j] += xv[i * k + j];
  }
  for (double& v : out) v /= static_cast<double>(n);
  return make_result({k}, std::move(out), {x}, [=](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) d[i * k + j] += self.grad[j] / static_cast<double>(n);
    }
  });
}

Tensor gather(const Tensor& v, std::span<const std::size_t> index) {
  std::vector<double> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= v.numel()) throw Error(ErrorCode::kOutOfRange, "gather index out of range");
    out[i] = v.at(index[i]);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return make_result({idx.size()}, std::move(out), {v}, [idx](Node& self) {
    auto& d = grad_of(self, 0);
    for (std::size_t i = 0; i < idx.size(); ++i) d[idx[i]] += self.grad[i];
  });
}

Tensor js_divergence(const Tensor& p, const Tensor& q, double eps) {
  if (p.numel() != q.numel()) throw Error(ErrorCode::kLengthMismatch, "js_divergence: length mismatch");
  const std::size_t k = p.numel();
  auto floor_normalize = [eps, k](std::span<const double> raw, double& total) {
    std::vector<double> out(k);
    total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      out[i] = std::max(raw[i], eps);
      total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
  };
  double sp = 0.0, sq = 0.0;
  const std::vector<double> ph = floor_normalize(p.values(), sp);
  const std::vector<double> qh = floor_normalize(q.values(), sq);
  double js = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double m = 0.5 * (ph[i] + qh[i]);
    js += 0.5 * ph[i] * std::log(ph[i] / m) + 0.5 * qh[i] * std::log(qh[i] / m);
  }
  js = std::max(js, 0.0);
  return make_result({1}, {js}, {p, q}, [=](Node& self) {
    const double g = self.grad[0];
    // d JS / d p_hat_i = 0.5 * log(p_hat_i / m_i); then back through the
    // renormalization and the floor.
    auto chain = [&](std::size_t which, const std::vector<double>& mine, const std::vector<double>& other,
                     double total) {
      if (!wants(self, which)) return;
      std::vector<double> dh(k);
      double dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double m = 0.5 * (mine[i] + other[i]);
        dh[i] = g * 0.5 * std::log(mine[i] / m);
        dot += dh[i] * mine[i];
      }
      auto& d = grad_of(self, which);
      const auto& raw = self.inputs[which]->value;
      for (std::size_t i = 0; i < k; ++i) {
        if (raw[i] > eps) d[i] += (dh[i] - dot) / total;
      }
    };
    chain(0, ph, qh, sp);
    chain(1, qh, ph, sq);
  });
}

}  // namespace jrtok::gradnet
