#include "anw/app/self_check.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "anw/app/animate.hpp"
#include "anw/diffusion/sampler.hpp"
#include "anw/numeric/parallel.hpp"
#include "anw/numeric/stats.hpp"
#include "anw/raster/rasterizer.hpp"
#include "anw/training/gradient_check.hpp"

namespace anw::app {
namespace {

template <class Fn>
CheckResult timed(const std::string& name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r{name, false, "", 0.0};
  try {
    std::ostringstream detail;
    r.passed = fn(detail);
    r.detail = detail.str();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// A 9-frame puppet clip at H x W; the skeleton is scaled with the frame height.
std::vector<raster::MotionMap> puppet_maps(std::int64_t H, std::int64_t W, std::uint64_t seed) {
  const double scale = static_cast<double>(H) / 96.0;
  const auto skeleton = body::scale_skeleton(body::Skeleton::default_humanoid(), scale);
  body::MotionOptions opts;
  opts.root_center = {W * 0.5, H * 0.54};
  opts.root_jitter = 6.0 * scale;
  Rng rng(seed);
  const auto poses = body::generate_pose_sequence(skeleton, rng, 2, 0.8, opts);
  return raster::rasterize_sequence(skeleton, poses, H, W);
}

}  // namespace

CheckResult check_degradation_algebra() {
  return timed("degradation algebra", [](std::ostream& d) {
    Rng rng(11);
    bool ok = true;
    double worst_err = 0.0, worst_var = 0.0;
    for (int g = 0; g <= 9; ++g) {
      const float gamma = 0.1f * static_cast<float>(g);
      Rng a = rng.stream(static_cast<std::uint64_t>(g));
      const Tensor eps = sample_standard_normal(a, {100000});
      const Tensor zeta = sample_standard_normal(a, {100000});
      const Tensor back = noise::undegrade(noise::degrade(eps, zeta, gamma), zeta, gamma);
      worst_err = std::max(worst_err, max_abs_diff(back, eps));

      const Tensor big_eps = sample_standard_normal(a, {1000000});
      const Tensor big_zeta = sample_standard_normal(a, {1000000});
      const auto m = stats::moments(noise::degrade(big_eps, big_zeta, gamma).data());
      worst_var = std::max(worst_var, std::abs(m.variance - 1.0));
    }
    ok = worst_err < 1e-5 && worst_var < 0.01;
    d << "max roundtrip error " << worst_err << ", max |var - 1| " << worst_var;
    return ok;
  });
}

CheckResult check_warp_roundtrip() {
  return timed("warp/fusion roundtrip", [](std::ostream& d) {
    const std::int64_t sizes[3][2] = {{48, 64}, {96, 128}, {192, 256}};
    double worst = 0.0;
    std::size_t covered = 0;
    for (int pose = 0; pose < 10; ++pose) {
      for (const auto& hw : sizes) {
        const auto maps = puppet_maps(hw[0], hw[1], 100 + static_cast<std::uint64_t>(pose));
        Rng rng(static_cast<std::uint64_t>(pose));
        Rng tex_rng = rng.stream("texture");
        Rng bg_rng = rng.stream("background");
        const Tensor tex = noise::sample_noise_texture(tex_rng, 64, 64, 4);
        const auto fused = noise::unwarp_fuse(noise::warp(tex, maps, bg_rng), maps, 64, 64);
        for (std::size_t k = 0; k < fused.coverage.size(); ++k) {
          if (fused.coverage[k] < 1.0f) continue;
          ++covered;
          for (std::size_t c = 0; c < 4; ++c) {
            worst = std::max(worst, std::abs(static_cast<double>(fused.values[k * 4 + c]) - tex[k * 4 + c]));
          }
        }
      }
    }
    d << "max error " << worst << " over " << covered << " covered texels";
    return covered > 0 && worst <= 1e-6;
  });
}

CheckResult check_noise_statistics() {
  return timed("noise statistics", [](std::ostream& d) {
    int ks_pass = 0;
    double min_p = 1.0, max_rho = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto maps = puppet_maps(96, 128, 500 + seed);
      Rng rng(seed);
      // Warped values deduplicated by texel: every kept sample comes from a
      // distinct texel of a fresh texture, hence is an independent draw.
      std::vector<float> samples;
      for (std::uint64_t draw = 0; samples.size() < 100000; ++draw) {
        Rng r = rng.stream(draw);
        Rng tex_rng = r.stream("texture");
        Rng bg_rng = r.stream("background");
        const Tensor tex = noise::sample_noise_texture(tex_rng, 64, 64, 8);
        const Tensor w = noise::warp(tex, maps, bg_rng);
        std::vector<bool> seen(64 * 64, false);
        for (std::size_t f = 0; f < maps.size(); ++f) {
          for (std::size_t p = 0; p < maps[f].pixels(); ++p) {
            if (!maps[f].mask[p]) continue;
            const auto t = noise::texel_index(maps[f].u[p], maps[f].v[p], 64, 64);
            const auto k = static_cast<std::size_t>(t.i * 64 + t.j);
            if (seen[k]) continue;
            seen[k] = true;
            for (std::size_t c = 0; c < 8; ++c) samples.push_back(w[(f * maps[f].pixels() + p) * 8 + c]);
          }
        }
      }
      samples.resize(100000);
      const auto ks = stats::ks_test_standard_normal(samples);
      min_p = std::min(min_p, ks.p_value);
      ks_pass += ks.p_value > 0.01 ? 1 : 0;

      Rng tex_rng = rng.stream("bg_texture");
      Rng bg_rng = rng.stream("bg");
      const Tensor w = noise::warp(noise::sample_noise_texture(tex_rng, 64, 64, 8), maps, bg_rng);
      std::vector<float> a, b;
      for (std::size_t f = 0; f + 1 < maps.size(); ++f) {
        for (std::size_t p = 0; p < maps[f].pixels(); ++p) {
          if (maps[f].mask[p] || maps[f + 1].mask[p]) continue;
          for (std::size_t c = 0; c < 8; ++c) {
            a.push_back(w[(f * maps[f].pixels() + p) * 8 + c]);
            b.push_back(w[((f + 1) * maps[f].pixels() + p) * 8 + c]);
          }
        }
      }
      max_rho = std::max(max_rho, std::abs(stats::correlation(a, b)));
    }
    d << "KS p > 0.01 for " << ks_pass << "/10 seeds (min p " << min_p << "), max background |rho| " << max_rho;
    return ks_pass >= 9 && max_rho < 0.01;
  });
}

CheckResult check_motion_transport() {
  return timed("motion transport invariant", [](std::ostream& d) {
    const auto maps = puppet_maps(96, 128, 77);
    Rng rng(3);
    Rng tex_rng = rng.stream("texture");
    Rng bg_rng = rng.stream("background");
    const std::int64_t C = 4;
    const Tensor w = noise::warp(noise::sample_noise_texture(tex_rng, 64, 64, C), maps, bg_rng);
    // First (frame, pixel) seen per texel; every later visit must match bitwise.
    std::map<std::int64_t, std::pair<std::size_t, std::size_t>> first;
    std::size_t comparisons = 0, mismatches = 0;
    for (std::size_t f = 0; f < maps.size(); ++f) {
      for (std::size_t p = 0; p < maps[f].pixels(); ++p) {
        if (!maps[f].mask[p]) continue;
        const auto t = noise::texel_index(maps[f].u[p], maps[f].v[p], 64, 64);
        const std::int64_t key = t.i * 64 + t.j;
        auto [it, inserted] = first.try_emplace(key, f, p);
        if (inserted || it->second.first == f) continue;
        const float* x = w.ptr() + (it->second.first * maps[f].pixels() + it->second.second) * C;
        const float* y = w.ptr() + (f * maps[f].pixels() + p) * C;
        ++comparisons;
        mismatches += std::memcmp(x, y, static_cast<std::size_t>(C) * sizeof(float)) != 0 ? 1 : 0;
      }
    }
    d << comparisons << " cross-frame texel visits, " << mismatches << " mismatches";
    return comparisons > 0 && mismatches == 0;
  });
}

CheckResult check_downsampling() {
  return timed("downsampling contract", [](std::ostream& d) {
    bool ok = noise::downsampled_shape({49, 480, 720, 16}, 8, 4) == Shape{13, 60, 90, 16};
    for (std::int64_t f = 1; f <= 12; ++f) {
      ok = ok && noise::downsampled_shape({4 * f + 1, 8 * 6, 8 * 9, 16}, 8, 4) == Shape{f + 1, 6, 9, 16};
    }
    Rng rng(5);
    const Tensor x = sample_standard_normal(rng, {49, 48, 72, 16});
    const Tensor y = noise::downsample_spatiotemporal(x, 8, 4);
    std::size_t bad = 0;
    for (std::int64_t k = 0; k < 13; ++k)
      for (std::int64_t i = 0; i < 6; ++i)
        for (std::int64_t j = 0; j < 9; ++j)
          for (std::int64_t c = 0; c < 16; ++c) {
            const float want = x[static_cast<std::size_t>((((4 * k) * 48 + 8 * i) * 72 + 8 * j) * 16 + c)];
            bad += y[static_cast<std::size_t>(((k * 6 + i) * 9 + j) * 16 + c)] != want ? 1 : 0;
          }
    bool rejects = false;
    try {
      noise::downsampled_shape({50, 48, 72, 16}, 8, 4);
    } catch (const ShapeError&) {
      rejects = true;
    }
    d << "shape rule " << (ok ? "holds" : "fails") << ", " << bad << " index mismatches, bad frame count "
      << (rejects ? "rejected" : "accepted");
    return ok && y.shape() == Shape{13, 6, 9, 16} && bad == 0 && rejects;
  });
}

CheckResult check_gradients() {
  return timed("gradient correctness", [](std::ostream& d) {
    const auto report = train::gradient_check();
    train::GradientCheckConfig diff_only;
    diff_only.weights = {1.0, 0.0, 0.0};
    const auto base = train::gradient_check(diff_only);
    d << "max relative error " << report.max_rel_error << " over " << report.parameter_count << " parameters (worst "
      << report.worst.parameter << "[" << report.worst.index << "], " << report.kink_crossings
      << " kink probes skipped); L_diff only " << base.max_rel_error;
    return report.parameter_count <= 1000 && report.max_rel_error < 1e-3 && base.max_rel_error < 1e-3;
  });
}

CheckResult check_sampler() {
  return timed("sampler determinism", [](std::ostream& d) {
    const auto schedule = diffusion::make_schedule({});
    Rng rng(9);
    const Tensor z0 = sample_standard_normal(rng, {3, 12, 16, 8});
    const Tensor eps = sample_standard_normal(rng, z0.shape());
    const auto oracle = [&](const Tensor&, int) { return eps; };
    double recovery = 0.0;
    for (const auto& steps : {std::vector<int>{1}, diffusion::ddim_timesteps(200, 20)}) {
      const Tensor zt = diffusion::add_noise(z0, eps, steps.front(), schedule);
      recovery = std::max(recovery, max_abs_diff(diffusion::ddim_sample(oracle, zt, schedule, steps), z0));
    }

    RunConfig cfg;
    cfg.data.f = 1;
    Rng model_rng(21);
    diffusion::Model model =
        diffusion::initialize_model(cfg.codec, cfg.schedule, cfg.denoiser_config(), cfg.decoder_config(), model_rng);
    Tensor& out_w = model.denoiser.params().at("out.w");
    out_w = diffusion::he_normal(model_rng, out_w.shape(), 9 * cfg.model.width1, 0.5);
    const Clip clip = make_clip(cfg, "probe", 4);
    AnimateOptions opts = animate_options(cfg);
    opts.ddim_steps = 4;
    const Tensor first = animate(model, clip.video.frame(0), clip.skeleton, clip.poses, opts).video;
    const Tensor second = animate(model, clip.video.frame(0), clip.skeleton, clip.poses, opts).video;
    set_thread_count(3);
    Tensor threaded;
    try {
      threaded = animate(model, clip.video.frame(0), clip.skeleton, clip.poses, opts).video;
    } catch (...) {
      set_thread_count(0);
      throw;
    }
    set_thread_count(0);
    const bool same = first == second && first == threaded;
    d << "oracle recovery error " << recovery << ", repeated animation " << (same ? "bitwise equal" : "differs");
    return recovery < 1e-4 && same;
  });
}

CheckResult check_schedule_and_codec() {
  return timed("schedule and codec", [](std::ostream& d) {
    const auto schedule = diffusion::make_schedule({});
    double prod = 1.0, sched_err = 0.0;
    for (int t = 1; t <= schedule.steps(); ++t) {
      prod *= 1.0 - schedule.beta(t);
      sched_err = std::max(sched_err, std::abs(prod - schedule.alpha_bar(t)));
    }
    Rng rng(2);
    const Tensor z0 = sample_standard_normal(rng, {3, 12, 16, 8});
    const Tensor eps = sample_standard_normal(rng, z0.shape());
    double inverse_err = 0.0;
    for (int t : {1, 50, 200}) {
      const Tensor zt = diffusion::add_noise(z0, eps, t, schedule);
      inverse_err = std::max(inverse_err, max_abs_diff(diffusion::predict_z0(zt, eps, t, schedule), z0));
    }
    const diffusion::LatentCodec codec;
    const Tensor x = sample_standard_normal(rng, {9, 32, 48, 3});
    const Tensor y = sample_standard_normal(rng, x.shape());
    Tensor mix = Tensor::zeros_like(x);
    for (std::size_t i = 0; i < x.size(); ++i) mix[i] = 0.7f * x[i] - 1.3f * y[i];
    const Tensor ex = codec.encode(x), ey = codec.encode(y), em = codec.encode(mix);
    double lin_err = 0.0;
    for (std::size_t i = 0; i < em.size(); ++i) {
      lin_err = std::max(lin_err, std::abs(static_cast<double>(em[i]) - (0.7 * ex[i] - 1.3 * ey[i])));
    }
    d << "alpha_bar error " << sched_err << ", noise inversion error " << inverse_err << ", codec linearity error "
      << lin_err;
    return sched_err < 1e-6 && inverse_err < 1e-5 && lin_err < 1e-5;
  });
}

std::vector<CheckResult> run_self_check(const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> results;
  for (auto fn : {check_degradation_algebra, check_warp_roundtrip, check_noise_statistics, check_motion_transport,
                  check_downsampling, check_gradients, check_sampler, check_schedule_and_codec}) {
    results.push_back(fn());
    if (on_result) on_result(results.back());
  }
  return results;
}

void print_result(std::ostream& os, const CheckResult& r) {
  os << (r.passed ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail << " (" << std::fixed
     << std::setprecision(2) << r.seconds << " s)" << std::defaultfloat << '\n';
}

}  // namespace anw::app
