#include "anw/numeric/ops.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace anw::ops {
namespace {

struct Dims4 {
  std::int64_t f, h, w, c;
};

Dims4 dims4(const Tensor& t, const char* what) {
  if (t.rank() != 4) throw ShapeError(std::string(what) + ": expected (F,H,W,C), got " + shape_string(t.shape()));
  return {t.dim(0), t.dim(1), t.dim(2), t.dim(3)};
}

void accumulate(Tape& tape, Var v, const Tensor& g) {
  if (!tape.requires_grad(v)) return;
  Tensor& buf = tape.grad_buffer(v);
  float* dst = buf.ptr();
  const float* src = g.ptr();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += src[i];
}

template <typename F>
Var unary(Var a, F&& forward, Tape::BackwardFn backward) {
  Tape& tape = *a.tape();
  Tensor out = Tensor::zeros_like(a.value());
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = forward(x[i]);
  return tape.record(std::move(out), {a}, std::move(backward));
}

Tape& same_tape(Var a, Var b) {
  if (a.tape() != b.tape() || a.tape() == nullptr) throw std::invalid_argument("operands on different tapes");
  return *a.tape();
}

}  // namespace

Var add(Var a, Var b) { return axpby(1.0f, a, 1.0f, b); }
Var sub(Var a, Var b) { return axpby(1.0f, a, -1.0f, b); }
Var scale(Var a, float s) {
  return unary(a, [s](float x) { return s * x; },
               [a, s](Tape& t, const Tensor& g) {
                 if (!t.requires_grad(a)) return;
                 Tensor& buf = t.grad_buffer(a);
                 for (std::size_t i = 0; i < g.size(); ++i) buf[i] += s * g[i];
               });
}

Var axpby(float alpha, Var a, float beta, Var b) {
  Tape& tape = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "axpby");
  Tensor out = Tensor::zeros_like(a.value());
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * x[i] + beta * y[i];
  return tape.record(std::move(out), {a, b}, [a, b, alpha, beta](Tape& t, const Tensor& g) {
    if (t.requires_grad(a)) {
      Tensor& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += alpha * g[i];
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += beta * g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = Tensor::zeros_like(a.value());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    const Tensor& y = t.value(b);
    if (t.requires_grad(a)) {
      Tensor& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
    }
  });
}

Var square(Var a) {
  return unary(a, [](float x) { return x * x; },
               [a](Tape& t, const Tensor& g) {
                 if (!t.requires_grad(a)) return;
                 const Tensor& x = t.value(a);
                 Tensor& buf = t.grad_buffer(a);
                 for (std::size_t i = 0; i < g.size(); ++i) buf[i] += 2.0f * x[i] * g[i];
               });
}

Var relu(Var a) {
  const Tensor& x = a.value();
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    word = (word << 1) | (x[i] > 0.0f ? 1u : 0u);
    if (i % 64 == 63) {
      a.tape()->mix_branch_signature(word);
      word = 0;
    }
  }
  a.tape()->mix_branch_signature(word);
  return unary(a, [](float x) { return x > 0.0f ? x : 0.0f; },
               [a](Tape& t, const Tensor& g) {
                 if (!t.requires_grad(a)) return;
                 const Tensor& x = t.value(a);
                 Tensor& buf = t.grad_buffer(a);
                 for (std::size_t i = 0; i < g.size(); ++i) buf[i] += x[i] > 0.0f ? g[i] : 0.0f;
               });
}

Var sigmoid(Var a) {
  Tape& tape = *a.tape();
  Tensor out = Tensor::zeros_like(a.value());
  const Tensor& av = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0f / (1.0f + std::exp(-av[i]));
  Var result;
  // The backward closure needs the output; it is read back through the tape.
  auto holder = std::make_shared<Var>();
  result = tape.record(std::move(out), {a}, [a, holder](Tape& t, const Tensor& g) {
    if (!t.requires_grad(a)) return;
    const Tensor& y = t.value(*holder);
    Tensor& buf = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i] * y[i] * (1.0f - y[i]);
  });
  *holder = result;
  return result;
}

Var sum(Var a) {
  Tape& tape = *a.tape();
  return tape.record(Tensor::scalar(static_cast<float>(anw::sum(a.value()))), {a},
                     [a](Tape& t, const Tensor& g) {
                       if (!t.requires_grad(a)) return;
                       Tensor& buf = t.grad_buffer(a);
                       for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[0];
                     });
}

Var mean(Var a) {
  const auto n = static_cast<float>(a.value().size());
  return scale(sum(a), n > 0 ? 1.0f / n : 0.0f);
}

Var mse(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "mse");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    acc += d * d;
  }
  const double n = static_cast<double>(x.size());
  return tape.record(Tensor::scalar(static_cast<float>(n > 0 ? acc / n : 0.0)), {a, b},
                     [a, b, n](Tape& t, const Tensor& g) {
                       const Tensor& x = t.value(a);
                       const Tensor& y = t.value(b);
                       const float k = static_cast<float>(2.0 / n) * g[0];
                       if (t.requires_grad(a)) {
                         Tensor& ga = t.grad_buffer(a);
                         for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += k * (x[i] - y[i]);
                       }
                       if (t.requires_grad(b)) {
                         Tensor& gb = t.grad_buffer(b);
                         for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= k * (x[i] - y[i]);
                       }
                     });
}

Var weighted_mse(Var a, Var b, const Tensor& weights) {
  Tape& tape = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "weighted_mse");
  const Tensor& x = a.value();
  std::size_t channels = 1;
  if (weights.size() != x.size()) {
    if (x.rank() == 0 || weights.size() * static_cast<std::size_t>(x.dim(-1)) != x.size()) {
      throw ShapeError("weighted_mse: weights " + shape_string(weights.shape()) + " incompatible with " +
                       shape_string(x.shape()));
    }
    channels = static_cast<std::size_t>(x.dim(-1));
  }
  const Tensor& y = b.value();
  double acc = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights[i / channels];
    const double d = static_cast<double>(x[i]) - y[i];
    acc += w * d * d;
    wsum += w;
  }
  const double norm = wsum > 0.0 ? 1.0 / wsum : 0.0;
  return tape.record(Tensor::scalar(static_cast<float>(acc * norm)), {a, b},
                     [a, b, weights, channels, norm](Tape& t, const Tensor& g) {
                       const Tensor& x = t.value(a);
                       const Tensor& y = t.value(b);
                       const double k = 2.0 * norm * g[0];
                       for (Var v : {a, b}) {
                         if (!t.requires_grad(v)) continue;
                         const float sign = v.id() == a.id() ? 1.0f : -1.0f;
                         Tensor& buf = t.grad_buffer(v);
                         for (std::size_t i = 0; i < buf.size(); ++i) {
                           buf[i] += sign * static_cast<float>(k * weights[i / channels]) * (x[i] - y[i]);
                         }
                       }
                     });
}

Var weighted_sum(std::span<const Var> terms, std::span<const float> weights) {
  if (terms.empty() || terms.size() != weights.size()) throw std::invalid_argument("weighted_sum: bad arity");
  Var acc = scale(terms[0], weights[0]);
  for (std::size_t i = 1; i < terms.size(); ++i) acc = axpby(1.0f, acc, weights[i], terms[i]);
  return acc;
}

Var linear(Var x, Var w, Var b) {
  Tape& tape = same_tape(x, w);
  const Tensor& in = x.value();
  const Tensor& wt = w.value();
  if (wt.rank() != 2 || b.value().rank() != 1 || b.value().dim(0) != wt.dim(1)) {
    throw ShapeError("linear: weight/bias shapes " + shape_string(wt.shape()) + ", " + shape_string(b.value().shape()));
  }
  const std::int64_t n = wt.dim(0);
  const std::int64_t m = wt.dim(1);
  if (in.rank() < 1 || in.dim(-1) != n) throw ShapeError("linear: input " + shape_string(in.shape()));
  const std::int64_t rows = static_cast<std::int64_t>(in.size()) / n;
  Shape out_shape = in.shape();
  out_shape.back() = m;
  Tensor out(out_shape);
  for (std::int64_t r = 0; r < rows; ++r) {
    float* o = out.ptr() + r * m;
    std::memcpy(o, b.value().ptr(), static_cast<std::size_t>(m) * sizeof(float));
    for (std::int64_t i = 0; i < n; ++i) {
      const float a = in[static_cast<std::size_t>(r * n + i)];
      const float* wr = wt.ptr() + i * m;
      for (std::int64_t j = 0; j < m; ++j) o[j] += a * wr[j];
    }
  }
  return tape.record(std::move(out), {x, w, b}, [x, w, b, rows, n, m](Tape& t, const Tensor& g) {
    const Tensor& in = t.value(x);
    const Tensor& wt = t.value(w);
    if (t.requires_grad(x)) {
      Tensor& gx = t.grad_buffer(x);
      for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (std::int64_t j = 0; j < m; ++j) acc += g[static_cast<std::size_t>(r * m + j)] * wt[static_cast<std::size_t>(i * m + j)];
          gx[static_cast<std::size_t>(r * n + i)] += static_cast<float>(acc);
        }
      }
    }
    if (t.requires_grad(w)) {
      Tensor& gw = t.grad_buffer(w);
      for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t i = 0; i < n; ++i) {
          const float a = in[static_cast<std::size_t>(r * n + i)];
          for (std::int64_t j = 0; j < m; ++j) gw[static_cast<std::size_t>(i * m + j)] += a * g[static_cast<std::size_t>(r * m + j)];
        }
      }
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buffer(b);
      for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t j = 0; j < m; ++j) gb[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(r * m + j)];
      }
    }
  });
}

namespace {

// (taps, ci, co) -> (taps, co, ci)
std::vector<float> transpose_taps(const float* w, std::int64_t taps, std::int64_t ci, std::int64_t co) {
  std::vector<float> out(static_cast<std::size_t>(taps * ci * co));
  for (std::int64_t k = 0; k < taps; ++k)
    for (std::int64_t c = 0; c < ci; ++c)
      for (std::int64_t o = 0; o < co; ++o) out[static_cast<std::size_t>((k * co + o) * ci + c)] = w[(k * ci + c) * co + o];
  return out;
}

}  // namespace

Var conv3x3(Var x, Var w, Var b) {
  Tape& tape = same_tape(x, w);
  const auto d = dims4(x.value(), "conv3x3");
  const Tensor& wt = w.value();
  if (wt.rank() != 4 || wt.dim(0) != 3 || wt.dim(1) != 3 || wt.dim(2) != d.c) {
    throw ShapeError("conv3x3: kernel " + shape_string(wt.shape()) + " for input " + shape_string(x.value().shape()));
  }
  const std::int64_t co = wt.dim(3);
  if (b.value().rank() != 1 || b.value().dim(0) != co) throw ShapeError("conv3x3: bias shape");
  const std::int64_t ci = d.c;

  Tensor out(Shape{d.f, d.h, d.w, co});
  const float* in = x.value().ptr();
  const float* kw = wt.ptr();
  const float* bias = b.value().ptr();
  for (std::int64_t f = 0; f < d.f; ++f) {
    for (std::int64_t y = 0; y < d.h; ++y) {
      for (std::int64_t xx = 0; xx < d.w; ++xx) {
        float* o = out.ptr() + ((f * d.h + y) * d.w + xx) * co;
        std::memcpy(o, bias, static_cast<std::size_t>(co) * sizeof(float));
        for (int ky = 0; ky < 3; ++ky) {
          const std::int64_t iy = y + ky - 1;
          if (iy < 0 || iy >= d.h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const std::int64_t ix = xx + kx - 1;
            if (ix < 0 || ix >= d.w) continue;
            const float* ip = in + ((f * d.h + iy) * d.w + ix) * ci;
            const float* kp = kw + (ky * 3 + kx) * ci * co;
            for (std::int64_t c = 0; c < ci; ++c) {
              const float a = ip[c];
              const float* kr = kp + c * co;
              for (std::int64_t o2 = 0; o2 < co; ++o2) o[o2] += a * kr[o2];
            }
          }
        }
      }
    }
  }

  return tape.record(std::move(out), {x, w, b}, [x, w, b, d, ci, co](Tape& t, const Tensor& g) {
    const float* in = t.value(x).ptr();
    const float* kw = t.value(w).ptr();
    const bool need_x = t.requires_grad(x);
    const bool need_w = t.requires_grad(w);
    float* gx = need_x ? t.grad_buffer(x).ptr() : nullptr;
    float* gw = need_w ? t.grad_buffer(w).ptr() : nullptr;
    // Kernel transposed to (tap, co, ci) so the input-gradient loop is a plain axpy.
    const std::vector<float> kw_t = need_x ? transpose_taps(kw, 9, ci, co) : std::vector<float>{};
    if (t.requires_grad(b)) {
      float* gb = t.grad_buffer(b).ptr();
      const std::int64_t pixels = d.f * d.h * d.w;
      for (std::int64_t p = 0; p < pixels; ++p) {
        const float* gp = g.ptr() + p * co;
        for (std::int64_t o2 = 0; o2 < co; ++o2) gb[o2] += gp[o2];
      }
    }
    for (std::int64_t f = 0; f < d.f; ++f) {
      for (std::int64_t y = 0; y < d.h; ++y) {
        for (std::int64_t xx = 0; xx < d.w; ++xx) {
          const float* gp = g.ptr() + ((f * d.h + y) * d.w + xx) * co;
          for (int ky = 0; ky < 3; ++ky) {
            const std::int64_t iy = y + ky - 1;
            if (iy < 0 || iy >= d.h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const std::int64_t ix = xx + kx - 1;
              if (ix < 0 || ix >= d.w) continue;
              const std::int64_t in_off = ((f * d.h + iy) * d.w + ix) * ci;
              const std::int64_t k_off = (ky * 3 + kx) * ci * co;
              if (need_x) {
                float* gxp = gx + in_off;
                const float* kt = kw_t.data() + k_off;
                for (std::int64_t o2 = 0; o2 < co; ++o2) {
                  const float go = gp[o2];
                  const float* kr = kt + o2 * ci;
                  for (std::int64_t c = 0; c < ci; ++c) gxp[c] += go * kr[c];
                }
              }
              if (need_w) {
                for (std::int64_t c = 0; c < ci; ++c) {
                  const float a = in[in_off + c];
                  float* gr = gw + k_off + c * co;
                  for (std::int64_t o2 = 0; o2 < co; ++o2) gr[o2] += a * gp[o2];
                }
              }
            }
          }
        }
      }
    }
  });
}

Var temporal_conv3(Var x, Var w, Var b) {
  Tape& tape = same_tape(x, w);
  const auto d = dims4(x.value(), "temporal_conv3");
  const Tensor& wt = w.value();
  if (wt.rank() != 3 || wt.dim(0) != 3 || wt.dim(1) != d.c) {
    throw ShapeError("temporal_conv3: kernel " + shape_string(wt.shape()) + " for input " + shape_string(x.value().shape()));
  }
  const std::int64_t ci = d.c;
  const std::int64_t co = wt.dim(2);
  if (b.value().rank() != 1 || b.value().dim(0) != co) throw ShapeError("temporal_conv3: bias shape");
  const std::int64_t plane = d.h * d.w;

  Tensor out(Shape{d.f, d.h, d.w, co});
  const float* in = x.value().ptr();
  for (std::int64_t f = 0; f < d.f; ++f) {
    for (std::int64_t p = 0; p < plane; ++p) {
      float* o = out.ptr() + (f * plane + p) * co;
      std::memcpy(o, b.value().ptr(), static_cast<std::size_t>(co) * sizeof(float));
      for (int k = 0; k < 3; ++k) {
        const std::int64_t src = f + k - 1;
        if (src < 0 || src >= d.f) continue;
        const float* ip = in + (src * plane + p) * ci;
        const float* kp = wt.ptr() + k * ci * co;
        for (std::int64_t c = 0; c < ci; ++c) {
          const float a = ip[c];
          for (std::int64_t o2 = 0; o2 < co; ++o2) o[o2] += a * kp[c * co + o2];
        }
      }
    }
  }

  return tape.record(std::move(out), {x, w, b}, [x, w, b, d, ci, co, plane](Tape& t, const Tensor& g) {
    const float* in = t.value(x).ptr();
    const float* kw = t.value(w).ptr();
    const bool need_x = t.requires_grad(x);
    const bool need_w = t.requires_grad(w);
    float* gx = need_x ? t.grad_buffer(x).ptr() : nullptr;
    float* gw = need_w ? t.grad_buffer(w).ptr() : nullptr;
    const std::vector<float> kw_t = need_x ? transpose_taps(kw, 3, ci, co) : std::vector<float>{};
    if (t.requires_grad(b)) {
      float* gb = t.grad_buffer(b).ptr();
      for (std::int64_t p = 0; p < d.f * plane; ++p) {
        for (std::int64_t o2 = 0; o2 < co; ++o2) gb[o2] += g[static_cast<std::size_t>(p * co + o2)];
      }
    }
    for (std::int64_t f = 0; f < d.f; ++f) {
      for (std::int64_t p = 0; p < plane; ++p) {
        const float* gp = g.ptr() + (f * plane + p) * co;
        for (int k = 0; k < 3; ++k) {
          const std::int64_t src = f + k - 1;
          if (src < 0 || src >= d.f) continue;
          const std::int64_t in_off = (src * plane + p) * ci;
          if (need_x) {
            float* gxp = gx + in_off;
            const float* kt = kw_t.data() + k * ci * co;
            for (std::int64_t o2 = 0; o2 < co; ++o2) {
              const float go = gp[o2];
              const float* kr = kt + o2 * ci;
              for (std::int64_t c = 0; c < ci; ++c) gxp[c] += go * kr[c];
            }
          }
          if (need_w) {
            for (std::int64_t c = 0; c < ci; ++c) {
              const float a = in[in_off + c];
              float* gr = gw + (k * ci + c) * co;
              for (std::int64_t o2 = 0; o2 < co; ++o2) gr[o2] += a * gp[o2];
            }
          }
        }
      }
    }
  });
}

Var add_channel_bias(Var x, Var bias) {
  Tape& tape = same_tape(x, bias);
  const Tensor& in = x.value();
  const std::int64_t c = in.dim(-1);
  if (bias.value().size() != static_cast<std::size_t>(c)) throw ShapeError("add_channel_bias: channel mismatch");
  Tensor out = in;
  const Tensor& bv = bias.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % static_cast<std::size_t>(c)];
  return tape.record(std::move(out), {x, bias}, [x, bias, c](Tape& t, const Tensor& g) {
    accumulate(t, x, g);
    if (t.requires_grad(bias)) {
      Tensor& gb = t.grad_buffer(bias);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % static_cast<std::size_t>(c)] += g[i];
    }
  });
}

Var avg_pool2(Var x) {
  Tape& tape = *x.tape();
  const auto d = dims4(x.value(), "avg_pool2");
  if (d.h % 2 != 0 || d.w % 2 != 0) throw ShapeError("avg_pool2: odd spatial size " + shape_string(x.value().shape()));
  const std::int64_t oh = d.h / 2;
  const std::int64_t ow = d.w / 2;
  Tensor out(Shape{d.f, oh, ow, d.c});
  const float* in = x.value().ptr();
  for (std::int64_t f = 0; f < d.f; ++f) {
    for (std::int64_t y = 0; y < oh; ++y) {
      for (std::int64_t xx = 0; xx < ow; ++xx) {
        float* o = out.ptr() + ((f * oh + y) * ow + xx) * d.c;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const float* ip = in + ((f * d.h + 2 * y + dy) * d.w + 2 * xx + dx) * d.c;
            for (std::int64_t c = 0; c < d.c; ++c) o[c] += 0.25f * ip[c];
          }
        }
      }
    }
  }
  return tape.record(std::move(out), {x}, [x, d, oh, ow](Tape& t, const Tensor& g) {
    if (!t.requires_grad(x)) return;
    float* gx = t.grad_buffer(x).ptr();
    for (std::int64_t f = 0; f < d.f; ++f) {
      for (std::int64_t y = 0; y < d.h; ++y) {
        for (std::int64_t xx = 0; xx < d.w; ++xx) {
          const float* gp = g.ptr() + ((f * oh + y / 2) * ow + xx / 2) * d.c;
          float* dst = gx + ((f * d.h + y) * d.w + xx) * d.c;
          for (std::int64_t c = 0; c < d.c; ++c) dst[c] += 0.25f * gp[c];
        }
      }
    }
  });
}

Var upsample_nearest(Var x, int factor) {
  Tape& tape = *x.tape();
  const auto d = dims4(x.value(), "upsample_nearest");
  if (factor < 1) throw ShapeError("upsample_nearest: factor must be positive");
  const std::int64_t oh = d.h * factor;
  const std::int64_t ow = d.w * factor;
  Tensor out(Shape{d.f, oh, ow, d.c});
  const float* in = x.value().ptr();
  for (std::int64_t f = 0; f < d.f; ++f) {
    for (std::int64_t y = 0; y < oh; ++y) {
      for (std::int64_t xx = 0; xx < ow; ++xx) {
        std::memcpy(out.ptr() + ((f * oh + y) * ow + xx) * d.c, in + ((f * d.h + y / factor) * d.w + xx / factor) * d.c,
                    static_cast<std::size_t>(d.c) * sizeof(float));
      }
    }
  }
  return tape.record(std::move(out), {x}, [x, d, oh, ow, factor](Tape& t, const Tensor& g) {
    if (!t.requires_grad(x)) return;
    float* gx = t.grad_buffer(x).ptr();
    for (std::int64_t f = 0; f < d.f; ++f) {
      for (std::int64_t y = 0; y < oh; ++y) {
        for (std::int64_t xx = 0; xx < ow; ++xx) {
          const float* gp = g.ptr() + ((f * oh + y) * ow + xx) * d.c;
          float* dst = gx + ((f * d.h + y / factor) * d.w + xx / factor) * d.c;
          for (std::int64_t c = 0; c < d.c; ++c) dst[c] += gp[c];
        }
      }
    }
  });
}

Var concat_channels(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const auto da = dims4(a.value(), "concat_channels");
  const auto db = dims4(b.value(), "concat_channels");
  if (da.f != db.f || da.h != db.h || da.w != db.w) throw ShapeError("concat_channels: leading axes differ");
  const std::int64_t c = da.c + db.c;
  const std::int64_t pixels = da.f * da.h * da.w;
  Tensor out(Shape{da.f, da.h, da.w, c});
  for (std::int64_t p = 0; p < pixels; ++p) {
    std::memcpy(out.ptr() + p * c, a.value().ptr() + p * da.c, static_cast<std::size_t>(da.c) * sizeof(float));
    std::memcpy(out.ptr() + p * c + da.c, b.value().ptr() + p * db.c, static_cast<std::size_t>(db.c) * sizeof(float));
  }
  return tape.record(std::move(out), {a, b}, [a, b, da, db, c, pixels](Tape& t, const Tensor& g) {
    if (t.requires_grad(a)) {
      float* ga = t.grad_buffer(a).ptr();
      for (std::int64_t p = 0; p < pixels; ++p) {
        for (std::int64_t k = 0; k < da.c; ++k) ga[p * da.c + k] += g[static_cast<std::size_t>(p * c + k)];
      }
    }
    if (t.requires_grad(b)) {
      float* gb = t.grad_buffer(b).ptr();
      for (std::int64_t p = 0; p < pixels; ++p) {
        for (std::int64_t k = 0; k < db.c; ++k) gb[p * db.c + k] += g[static_cast<std::size_t>(p * c + da.c + k)];
      }
    }
  });
}

Var gather_frames(Var x, std::span<const std::int64_t> indices) {
  Tape& tape = *x.tape();
  const Tensor& in = x.value();
  if (in.rank() < 1) throw ShapeError("gather_frames: rank-0 input");
  const std::size_t frame_size = in.size() / static_cast<std::size_t>(in.dim(0));
  Shape shape = in.shape();
  shape[0] = static_cast<std::int64_t>(indices.size());
  Tensor out(shape);
  std::vector<std::int64_t> idx(indices.begin(), indices.end());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= in.dim(0)) throw ShapeError("gather_frames: index out of range");
    std::memcpy(out.ptr() + k * frame_size, in.ptr() + static_cast<std::size_t>(idx[k]) * frame_size,
                frame_size * sizeof(float));
  }
  return tape.record(std::move(out), {x}, [x, idx, frame_size](Tape& t, const Tensor& g) {
    if (!t.requires_grad(x)) return;
    float* gx = t.grad_buffer(x).ptr();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      float* dst = gx + static_cast<std::size_t>(idx[k]) * frame_size;
      const float* src = g.ptr() + k * frame_size;
      for (std::size_t i = 0; i < frame_size; ++i) dst[i] += src[i];
    }
  });
}

Var instance_norm(Var x, Var gamma, Var beta, float eps) {
  Tape& tape = same_tape(x, gamma);
  const auto d = dims4(x.value(), "instance_norm");
  if (gamma.value().size() != static_cast<std::size_t>(d.c) || beta.value().size() != static_cast<std::size_t>(d.c)) {
    throw ShapeError("instance_norm: affine parameter size");
  }
  const std::int64_t plane = d.h * d.w;
  // Normalized activations and inverse deviations, cached for the backward pass.
  auto xhat = std::make_shared<Tensor>(Tensor::zeros_like(x.value()));
  auto inv_std = std::make_shared<std::vector<float>>(static_cast<std::size_t>(d.f * d.c));
  Tensor out = Tensor::zeros_like(x.value());
  const float* in = x.value().ptr();
  const Tensor& gm = gamma.value();
  const Tensor& bt = beta.value();
  for (std::int64_t f = 0; f < d.f; ++f) {
    for (std::int64_t c = 0; c < d.c; ++c) {
      double s = 0.0;
      for (std::int64_t p = 0; p < plane; ++p) s += in[(f * plane + p) * d.c + c];
      const double mu = s / static_cast<double>(plane);
      double v = 0.0;
      for (std::int64_t p = 0; p < plane; ++p) {
        const double dv = in[(f * plane + p) * d.c + c] - mu;
        v += dv * dv;
      }
      v /= static_cast<double>(plane);
      const double is = 1.0 / std::sqrt(v + eps);
      (*inv_std)[static_cast<std::size_t>(f * d.c + c)] = static_cast<float>(is);
      for (std::int64_t p = 0; p < plane; ++p) {
        const std::size_t i = static_cast<std::size_t>((f * plane + p) * d.c + c);
        const float xh = static_cast<float>((in[i] - mu) * is);
        (*xhat)[i] = xh;
        out[i] = gm[static_cast<std::size_t>(c)] * xh + bt[static_cast<std::size_t>(c)];
      }
    }
  }
  return tape.record(std::move(out), {x, gamma, beta}, [x, gamma, beta, d, plane, xhat, inv_std](Tape& t, const Tensor& g) {
    const Tensor& gm = t.value(gamma);
    const bool need_x = t.requires_grad(x);
    float* gx = need_x ? t.grad_buffer(x).ptr() : nullptr;
    float* gg = t.requires_grad(gamma) ? t.grad_buffer(gamma).ptr() : nullptr;
    float* gb = t.requires_grad(beta) ? t.grad_buffer(beta).ptr() : nullptr;
    const double n = static_cast<double>(plane);
    for (std::int64_t f = 0; f < d.f; ++f) {
      for (std::int64_t c = 0; c < d.c; ++c) {
        double sum_g = 0.0;
        double sum_gx = 0.0;
        for (std::int64_t p = 0; p < plane; ++p) {
          const std::size_t i = static_cast<std::size_t>((f * plane + p) * d.c + c);
          sum_g += g[i];
          sum_gx += static_cast<double>(g[i]) * (*xhat)[i];
        }
        if (gg) gg[c] += static_cast<float>(sum_gx);
        if (gb) gb[c] += static_cast<float>(sum_g);
        if (!need_x) continue;
        const double k = gm[static_cast<std::size_t>(c)] * (*inv_std)[static_cast<std::size_t>(f * d.c + c)] / n;
        for (std::int64_t p = 0; p < plane; ++p) {
          const std::size_t i = static_cast<std::size_t>((f * plane + p) * d.c + c);
          gx[i] += static_cast<float>(k * (n * g[i] - sum_g - (*xhat)[i] * sum_gx));
        }
      }
    }
  });
}

}  // namespace anw::ops
