#include "anw/training/reference_objective.hpp"

#include <cmath>
#include <stdexcept>

#include "anw/diffusion/denoiser.hpp"
#include "anw/noisefield/texel.hpp"

namespace anw::train {
namespace {

struct Grid {
  std::int64_t f = 0, h = 0, w = 0, c = 0;
  std::vector<double> v;

  Grid() = default;
  Grid(std::int64_t f_, std::int64_t h_, std::int64_t w_, std::int64_t c_)
      : f(f_), h(h_), w(w_), c(c_), v(static_cast<std::size_t>(f_ * h_ * w_ * c_), 0.0) {}
  double& at(std::int64_t a, std::int64_t y, std::int64_t x, std::int64_t k) {
    return v[static_cast<std::size_t>(((a * h + y) * w + x) * c + k)];
  }
  double at(std::int64_t a, std::int64_t y, std::int64_t x, std::int64_t k) const {
    return v[static_cast<std::size_t>(((a * h + y) * w + x) * c + k)];
  }
};

Grid from_tensor(const Tensor& t) {
  Grid g(t.dim(0), t.dim(1), t.dim(2), t.dim(3));
  for (std::size_t i = 0; i < t.size(); ++i) g.v[i] = t[i];
  return g;
}

struct Signature {
  std::uint64_t value = 0xcbf29ce484222325ull;
  void relu(std::vector<double>& x) {
    std::uint64_t bits = 0;
    int n = 0;
    for (double& a : x) {
      const bool on = a > 0.0;
      if (!on) a = 0.0;
      bits = (bits << 1) | (on ? 1u : 0u);
      if (++n == 64) {
        mix(bits);
        bits = 0;
        n = 0;
      }
    }
    mix(bits ^ (static_cast<std::uint64_t>(n) << 58));
  }
  void mix(std::uint64_t bits) { value = (value ^ bits) * 0x100000001b3ull; }
};

// w: (3, 3, ci, co)
Grid conv3x3(const Grid& x, const std::vector<double>& w, const std::vector<double>& b) {
  const std::int64_t co = static_cast<std::int64_t>(b.size());
  if (static_cast<std::int64_t>(w.size()) != 9 * x.c * co) throw std::invalid_argument("reference conv3x3: kernel size");
  Grid out(x.f, x.h, x.w, co);
  for (std::int64_t f = 0; f < x.f; ++f)
    for (std::int64_t y = 0; y < x.h; ++y)
      for (std::int64_t xx = 0; xx < x.w; ++xx)
        for (std::int64_t o = 0; o < co; ++o) {
          double s = b[static_cast<std::size_t>(o)];
          for (int ky = 0; ky < 3; ++ky) {
            const std::int64_t iy = y + ky - 1;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const std::int64_t ix = xx + kx - 1;
              if (ix < 0 || ix >= x.w) continue;
              for (std::int64_t k = 0; k < x.c; ++k) {
                s += x.at(f, iy, ix, k) * w[static_cast<std::size_t>(((ky * 3 + kx) * x.c + k) * co + o)];
              }
            }
          }
          out.at(f, y, xx, o) = s;
        }
  return out;
}

// w: (3, ci, co); tap k reads frame f + k - 1.
Grid temporal_conv3(const Grid& x, const std::vector<double>& w, const std::vector<double>& b) {
  const std::int64_t co = static_cast<std::int64_t>(b.size());
  Grid out(x.f, x.h, x.w, co);
  for (std::int64_t f = 0; f < x.f; ++f)
    for (std::int64_t y = 0; y < x.h; ++y)
      for (std::int64_t xx = 0; xx < x.w; ++xx)
        for (std::int64_t o = 0; o < co; ++o) {
          double s = b[static_cast<std::size_t>(o)];
          for (int k = 0; k < 3; ++k) {
            const std::int64_t src = f + k - 1;
            if (src < 0 || src >= x.f) continue;
            for (std::int64_t c = 0; c < x.c; ++c) {
              s += x.at(src, y, xx, c) * w[static_cast<std::size_t>((k * x.c + c) * co + o)];
            }
          }
          out.at(f, y, xx, o) = s;
        }
  return out;
}

std::vector<double> linear(const std::vector<double>& x, const std::vector<double>& w, const std::vector<double>& b) {
  const std::size_t m = b.size();
  std::vector<double> out(b);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) out[j] += x[i] * w[i * m + j];
  return out;
}

void add_channel_bias(Grid& x, const std::vector<double>& bias) {
  for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += bias[i % static_cast<std::size_t>(x.c)];
}

Grid avg_pool2(const Grid& x) {
  Grid out(x.f, x.h / 2, x.w / 2, x.c);
  for (std::int64_t f = 0; f < out.f; ++f)
    for (std::int64_t y = 0; y < out.h; ++y)
      for (std::int64_t xx = 0; xx < out.w; ++xx)
        for (std::int64_t c = 0; c < x.c; ++c) {
          out.at(f, y, xx, c) = 0.25 * (x.at(f, 2 * y, 2 * xx, c) + x.at(f, 2 * y + 1, 2 * xx, c) +
                                        x.at(f, 2 * y, 2 * xx + 1, c) + x.at(f, 2 * y + 1, 2 * xx + 1, c));
        }
  return out;
}

Grid upsample(const Grid& x, std::int64_t k) {
  Grid out(x.f, x.h * k, x.w * k, x.c);
  for (std::int64_t f = 0; f < out.f; ++f)
    for (std::int64_t y = 0; y < out.h; ++y)
      for (std::int64_t xx = 0; xx < out.w; ++xx)
        for (std::int64_t c = 0; c < x.c; ++c) out.at(f, y, xx, c) = x.at(f, y / k, xx / k, c);
  return out;
}

Grid concat(const Grid& a, const Grid& b) {
  Grid out(a.f, a.h, a.w, a.c + b.c);
  for (std::int64_t f = 0; f < a.f; ++f)
    for (std::int64_t y = 0; y < a.h; ++y)
      for (std::int64_t xx = 0; xx < a.w; ++xx) {
        for (std::int64_t c = 0; c < a.c; ++c) out.at(f, y, xx, c) = a.at(f, y, xx, c);
        for (std::int64_t c = 0; c < b.c; ++c) out.at(f, y, xx, a.c + c) = b.at(f, y, xx, c);
      }
  return out;
}

void instance_norm(Grid& x, const std::vector<double>& gamma, const std::vector<double>& beta) {
  const double n = static_cast<double>(x.h * x.w);
  for (std::int64_t f = 0; f < x.f; ++f)
    for (std::int64_t c = 0; c < x.c; ++c) {
      double mu = 0.0;
      for (std::int64_t y = 0; y < x.h; ++y)
        for (std::int64_t xx = 0; xx < x.w; ++xx) mu += x.at(f, y, xx, c);
      mu /= n;
      double var = 0.0;
      for (std::int64_t y = 0; y < x.h; ++y)
        for (std::int64_t xx = 0; xx < x.w; ++xx) var += (x.at(f, y, xx, c) - mu) * (x.at(f, y, xx, c) - mu);
      const double inv = 1.0 / std::sqrt(var / n + 1e-5);
      for (std::int64_t y = 0; y < x.h; ++y)
        for (std::int64_t xx = 0; xx < x.w; ++xx) {
          double& a = x.at(f, y, xx, c);
          a = gamma[static_cast<std::size_t>(c)] * (a - mu) * inv + beta[static_cast<std::size_t>(c)];
        }
    }
}

Grid denoise(const std::vector<std::vector<double>>& p, const Grid& z, const Tensor& reference, int t,
             std::int64_t time_dim, Signature& sig) {
  enum { kTimeW1, kTimeB1, kBias1W, kBias1B, kBias2W, kBias2B, kInW, kInB, kT1W, kT1B,
         kDownW, kDownB, kT2W, kT2B, kUpW, kUpB, kOutW, kOutB, kCount };
  if (p.size() != kCount) throw std::invalid_argument("reference denoiser: parameter count");
  std::vector<double> temb(static_cast<std::size_t>(time_dim), 0.0);
  const std::int64_t half = time_dim / 2;
  for (std::int64_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    temb[static_cast<std::size_t>(i)] = std::sin(t * freq);
    temb[static_cast<std::size_t>(i + half)] = std::cos(t * freq);
  }
  std::vector<double> hidden = linear(temb, p[kTimeW1], p[kTimeB1]);
  sig.relu(hidden);
  const auto bias1 = linear(hidden, p[kBias1W], p[kBias1B]);
  const auto bias2 = linear(hidden, p[kBias2W], p[kBias2B]);

  Grid ref(z.f, z.h, z.w, z.c);
  for (std::int64_t f = 0; f < z.f; ++f)
    for (std::size_t i = 0; i < reference.size(); ++i) ref.v[static_cast<std::size_t>(f) * reference.size() + i] = reference[i];

  Grid h1 = conv3x3(concat(z, ref), p[kInW], p[kInB]);
  add_channel_bias(h1, bias1);
  sig.relu(h1.v);
  Grid a1 = temporal_conv3(h1, p[kT1W], p[kT1B]);
  for (std::size_t i = 0; i < a1.v.size(); ++i) a1.v[i] += h1.v[i];
  sig.relu(a1.v);

  Grid h2 = conv3x3(avg_pool2(a1), p[kDownW], p[kDownB]);
  add_channel_bias(h2, bias2);
  sig.relu(h2.v);
  Grid a2 = temporal_conv3(h2, p[kT2W], p[kT2B]);
  for (std::size_t i = 0; i < a2.v.size(); ++i) a2.v[i] += h2.v[i];
  sig.relu(a2.v);

  Grid h3 = conv3x3(concat(upsample(a2, 2), a1), p[kUpW], p[kUpB]);
  sig.relu(h3.v);
  return conv3x3(h3, p[kOutW], p[kOutB]);
}

Grid decode(const std::vector<std::vector<double>>& p, const Grid& latent, const diffusion::MotionDecoderConfig& cfg,
            Signature& sig) {
  enum { kW1, kB1, kG1, kBeta1, kW2, kB2, kG2, kBeta2, kWh, kBh, kCount };
  if (p.size() != kCount) throw std::invalid_argument("reference decoder: parameter count");
  Grid x = conv3x3(upsample(latent, 2), p[kW1], p[kB1]);
  instance_norm(x, p[kG1], p[kBeta1]);
  sig.relu(x.v);
  x = conv3x3(upsample(x, 2), p[kW2], p[kB2]);
  instance_norm(x, p[kG2], p[kBeta2]);
  sig.relu(x.v);
  x = conv3x3(x, p[kWh], p[kBh]);
  for (double& a : x.v) a = 1.0 / (1.0 + std::exp(-a));
  if (cfg.spatial > 4) x = upsample(x, cfg.spatial / 4);
  const diffusion::LatentCodec codec{cfg.spatial, cfg.temporal, cfg.channels};
  const auto layout = codec.frame_layout(latent.f);
  Grid out(static_cast<std::int64_t>(layout.size()), x.h, x.w, x.c);
  const std::size_t frame = static_cast<std::size_t>(x.h * x.w * x.c);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    std::copy_n(x.v.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(layout[k]) * frame),
                frame, out.v.begin() + static_cast<std::ptrdiff_t>(k * frame));
  }
  return out;
}

double mse(const std::vector<double>& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

std::vector<double> widen(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

ReferenceParameters reference_parameters(const diffusion::Model& model) {
  ReferenceParameters p;
  for (std::size_t k = 0; k < model.denoiser.params().size(); ++k) p.denoiser.push_back(widen(model.denoiser.params().value(k)));
  for (std::size_t k = 0; k < model.decoder.params().size(); ++k) p.decoder.push_back(widen(model.decoder.params().value(k)));
  return p;
}

ReferenceLosses reference_objective(const diffusion::Model& model, const ReferenceParameters& params,
                                    const PreparedClip& clip, const SampleDraws& draws, const TrainConfig& config) {
  validate(config.weights);
  const auto schedule = diffusion::make_schedule(model.schedule);
  // Inputs do not depend on the parameters; they are formed exactly as in training.
  const Tensor eps_tilde = noise::degrade(draws.eps, draws.zeta, draws.gamma);
  const Tensor z_t = diffusion::add_noise(clip.z0, eps_tilde, draws.t, schedule);

  Signature sig;
  const Grid zt = from_tensor(z_t);
  const Grid eps_pred = denoise(params.denoiser, zt, clip.reference, draws.t, model.denoiser.config().time_dim, sig);

  ReferenceLosses r;
  r.l_diff = mse(eps_pred.v, eps_tilde);

  const double ab = schedule.alpha_bar(draws.t);
  Grid z0_pred = zt;
  for (std::size_t i = 0; i < z0_pred.v.size(); ++i) {
    z0_pred.v[i] = (zt.v[i] - std::sqrt(1.0 - ab) * eps_pred.v[i]) / std::sqrt(ab);
  }
  const Grid motion = decode(params.decoder, z0_pred, model.decoder.config(), sig);
  if (config.masked_md) {
    double acc = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < motion.v.size(); ++i) {
      const double w = clip.mask[i / 3];
      acc += w * (motion.v[i] - clip.target[i]) * (motion.v[i] - clip.target[i]);
      wsum += w;
    }
    r.l_md = wsum > 0.0 ? acc / wsum : 0.0;
  } else {
    r.l_md = mse(motion.v, clip.target);
  }

  if (draws.gamma < config.gamma_max) {
    const double g = draws.gamma;
    const double k = std::sqrt((1.0 - g) * (1.0 - g) + g * g);
    const std::int64_t U = config.texture_u;
    const std::int64_t V = config.texture_v;
    const std::int64_t C = eps_pred.c;
    std::vector<double> acc(static_cast<std::size_t>(U * V * C), 0.0);
    std::vector<double> count(static_cast<std::size_t>(U * V), 0.0);
    const std::size_t plane = static_cast<std::size_t>(eps_pred.h * eps_pred.w);
    for (std::size_t f = 0; f < clip.latent_maps.size(); ++f) {
      const auto& m = clip.latent_maps[f];
      for (std::size_t p = 0; p < m.pixels(); ++p) {
        if (!m.mask[p]) continue;
        const auto tx = noise::texel_index(m.u[p], m.v[p], U, V);
        const std::size_t id = static_cast<std::size_t>(tx.i * V + tx.j);
        count[id] += 1.0;
        for (std::int64_t c = 0; c < C; ++c) {
          const std::size_t i = (f * plane + p) * static_cast<std::size_t>(C) + static_cast<std::size_t>(c);
          acc[id * static_cast<std::size_t>(C) + static_cast<std::size_t>(c)] += (k * eps_pred.v[i] - g * draws.zeta[i]) / (1.0 - g);
        }
      }
    }
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t id = 0; id < count.size(); ++id) {
      if (count[id] < 1.0) continue;
      for (std::int64_t c = 0; c < C; ++c) {
        const std::size_t i = id * static_cast<std::size_t>(C) + static_cast<std::size_t>(c);
        const double d = draws.texture[i] - acc[i] / count[id];
        s += d * d;
        ++n;
      }
    }
    r.l_mc = n == 0 ? 0.0 : s / static_cast<double>(n);
  }
  r.total = total_loss(r.l_diff, r.l_mc, r.l_md, config.weights);
  r.branch_signature = sig.value;
  return r;
}

}  // namespace anw::train
