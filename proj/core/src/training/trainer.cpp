#include "anw/training/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "anw/numeric/ops.hpp"
#include "anw/numeric/parallel.hpp"

namespace anw::train {

using diffusion::Model;

void apply_preset(TrainConfig& config, const std::string& preset) {
  if (preset == "base") {
    config.weights = {1.0, 0.0, 0.0};
  } else if (preset == "jaml") {
    config.weights = {1.0, 0.0, 0.5};
  } else if (preset == "full") {
    config.weights = {1.0, 0.5, 0.5};
  } else {
    throw std::invalid_argument("unknown preset '" + preset + "' (expected base, jaml or full)");
  }
}

PreparedClip prepare_clip(const TrainingClip& clip, const diffusion::LatentCodec& codec) {
  if (clip.video.rank() != 4 || static_cast<std::size_t>(clip.video.dim(0)) != clip.maps.size()) {
    throw ShapeError("prepare_clip: video frames and motion maps disagree");
  }
  PreparedClip p;
  p.maps = clip.maps;
  p.latent_maps = noise::downsample_motion_maps(clip.maps, codec.spatial, codec.temporal);
  p.z0 = codec.normalize(codec.encode(clip.video));
  p.reference = p.z0.frame(0);
  p.target = raster::motion_target(clip.maps);
  p.mask = raster::mask_tensor(clip.maps);
  return p;
}

SampleDraws draw_sample(const PreparedClip& clip, const Model& model, const TrainConfig& config, Rng& rng) {
  SampleDraws d;
  Rng tex_rng = rng.stream("texture");
  Rng bg_rng = rng.stream("background");
  Rng zeta_rng = rng.stream("zeta");
  Rng misc = rng.stream("gamma_t");
  d.texture = noise::sample_noise_texture(tex_rng, config.texture_u, config.texture_v, model.codec.channels);
  const Tensor image_noise = noise::warp(d.texture, clip.maps, bg_rng, config.background);
  d.eps = noise::downsample_spatiotemporal(image_noise, model.codec.spatial, model.codec.temporal);
  d.zeta = sample_standard_normal(zeta_rng, d.eps.shape());
  d.gamma = static_cast<float>(misc.uniform(config.gamma_lo, config.gamma_hi));
  d.t = static_cast<int>(misc.uniform_int(1, model.schedule.steps));
  return d;
}

SampleResult evaluate_sample(const Model& model, const PreparedClip& clip, const SampleDraws& draws,
                             const TrainConfig& config, bool with_grads) {
  validate(config.weights);
  const auto schedule = diffusion::make_schedule(model.schedule);
  Tape tape(with_grads);
  const auto den_w = model.denoiser.params().bind(tape, with_grads);
  const bool md_active = config.weights.md > 0.0;
  const auto dec_w = model.decoder.params().bind(tape, with_grads && md_active);

  const Tensor eps_tilde = noise::degrade(draws.eps, draws.zeta, draws.gamma);
  const Tensor z_t = diffusion::add_noise(clip.z0, eps_tilde, draws.t, schedule);
  Var zt = tape.constant(z_t);
  Var eps_pred = model.denoiser.forward(tape, den_w, zt, clip.reference, draws.t);
  Var l_diff = loss_diff(tape.constant(eps_tilde), eps_pred);

  Var z0_pred = diffusion::predict_z0(zt, eps_pred, draws.t, schedule);
  // With a zero weight the decoder branch is reported but kept off the graph.
  Var md_input = md_active ? z0_pred : tape.constant(z0_pred.value());
  Var motion = model.decoder.forward(tape, dec_w, md_input);
  Var target = tape.constant(clip.target);
  Var l_md = config.masked_md ? loss_md_masked(target, motion, clip.mask) : loss_md(target, motion);

  SampleResult r;
  r.losses.gamma = draws.gamma;
  r.losses.t = draws.t;
  std::vector<Var> terms{l_diff};
  std::vector<float> weights{static_cast<float>(config.weights.diff)};
  if (md_active) {
    terms.push_back(l_md);
    weights.push_back(static_cast<float>(config.weights.md));
  }
  if (draws.gamma < config.gamma_max) {
    Var restored = noise::undegrade(eps_pred, draws.zeta, draws.gamma, config.gamma_max);
    auto fused = noise::unwarp_fuse(restored, clip.latent_maps, config.texture_u, config.texture_v);
    Var l_mc = loss_mc(tape.constant(draws.texture), fused.values, fused.coverage);
    r.losses.l_mc = loss_mc(draws.texture, fused.values.value(), fused.coverage);
    if (config.weights.mc > 0.0) {
      terms.push_back(l_mc);
      weights.push_back(static_cast<float>(config.weights.mc));
    }
  } else {
    r.losses.mc_skipped = true;
  }
  // Reported losses are re-reduced in double from the forward tensors.
  r.losses.l_diff = loss_diff(eps_tilde, eps_pred.value());
  r.losses.l_md = config.masked_md ? loss_md_masked(clip.target, motion.value(), clip.mask)
                                   : loss_md(clip.target, motion.value());
  r.losses.total = total_loss(r.losses.l_diff, r.losses.l_mc, r.losses.l_md, config.weights);

  if (!std::isfinite(r.losses.total)) {
    std::ostringstream os;
    os << "non-finite loss (l_diff=" << r.losses.l_diff << ", l_mc=" << r.losses.l_mc << ", l_md=" << r.losses.l_md
       << ", gamma=" << draws.gamma << ", t=" << draws.t << ")";
    throw NonFiniteLoss(os.str());
  }
  r.branch_signature = tape.branch_signature();
  if (!with_grads) return r;

  tape.backward(ops::weighted_sum(terms, weights));
  for (Var w : den_w) r.denoiser_grads.push_back(tape.grad(w));
  for (Var w : dec_w) {
    r.decoder_grads.push_back(tape.requires_grad(w) ? tape.grad(w) : Tensor::zeros_like(w.value()));
  }
  return r;
}

namespace {

std::vector<Tensor*> parameter_pointers(Model& model) {
  std::vector<Tensor*> ptrs;
  auto& den = model.denoiser.params();
  auto& dec = model.decoder.params();
  for (std::size_t i = 0; i < den.size(); ++i) ptrs.push_back(&den.value(i));
  for (std::size_t i = 0; i < dec.size(); ++i) ptrs.push_back(&dec.value(i));
  return ptrs;
}

}  // namespace

Adam make_optimizer(Model& model, const AdamConfig& config) {
  const auto ptrs = parameter_pointers(model);
  return Adam(config, ptrs);
}

double clip_grad_norm(std::span<Tensor> grads, double max_norm) {
  double norm2 = 0.0;
  for (const Tensor& g : grads) {
    for (float x : g.data()) norm2 += static_cast<double>(x) * x;
  }
  const double norm = std::sqrt(norm2);
  if (norm > max_norm) {
    const auto scale = static_cast<float>(max_norm / norm);
    for (Tensor& g : grads) {
      for (float& x : g.data()) x *= scale;
    }
  }
  return norm;
}

std::vector<LossBreakdown> train_step(Model& model, Adam& optimizer, std::span<const PreparedClip> clips,
                                      std::span<const std::size_t> batch, const TrainConfig& config, const Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const Rng step_rng = rng.stream(static_cast<std::uint64_t>(optimizer.steps()));
  std::vector<SampleResult> results(batch.size());
  parallel_for(static_cast<std::int64_t>(batch.size()), [&](std::int64_t i) {
    const PreparedClip& clip = clips[batch[static_cast<std::size_t>(i)]];
    Rng sample_rng = step_rng.stream(static_cast<std::uint64_t>(i));
    const SampleDraws draws = draw_sample(clip, model, config, sample_rng);
    results[static_cast<std::size_t>(i)] = evaluate_sample(model, clip, draws, config, true);
  });

  std::vector<Tensor> grads;
  for (const auto& r : results) {
    std::size_t k = 0;
    for (const auto* set : {&r.denoiser_grads, &r.decoder_grads}) {
      for (const Tensor& g : *set) {
        if (grads.size() <= k) grads.push_back(Tensor::zeros_like(g));
        Tensor& acc = grads[k++];
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
      }
    }
  }
  const float inv = 1.0f / static_cast<float>(batch.size());
  for (Tensor& g : grads) {
    for (float& x : g.data()) x *= inv;
    if (!g.all_finite()) throw NonFiniteLoss("non-finite gradient at step " + std::to_string(optimizer.steps()));
  }
  if (config.max_grad_norm > 0.0) clip_grad_norm(grads, config.max_grad_norm);
  const auto ptrs = parameter_pointers(model);
  optimizer.step(ptrs, grads);
  ++model.step;

  std::vector<LossBreakdown> out;
  for (const auto& r : results) out.push_back(r.losses);
  return out;
}

void write_log_header(std::ostream& os) { os << "step,l_diff,l_mc,l_md,total,gamma,t\n"; }

void write_log_rows(std::ostream& os, std::int64_t step, const std::vector<LossBreakdown>& rows) {
  for (const auto& r : rows) {
    os << step << ',' << std::setprecision(9) << r.l_diff << ',' << r.l_mc << ',' << r.l_md << ',' << r.total << ','
       << r.gamma << ',' << r.t << '\n';
  }
}

void train(Model& model, std::span<const PreparedClip> clips, const TrainConfig& config, const TrainOutputs& outputs,
           const std::function<void(int, const std::vector<LossBreakdown>&)>& progress) {
  if (clips.empty()) throw std::invalid_argument("train: no clips");
  if (config.batch_size < 1 || config.steps < 0) throw std::invalid_argument("train: invalid batch size or step count");
  Adam optimizer = make_optimizer(model, config.adam);
  const Rng root(config.seed);
  const Rng sample_root = root.stream("samples");
  Rng batch_rng = root.stream("batches");

  std::ofstream log;
  if (outputs.log) {
    log.open(*outputs.log);
    if (!log) throw std::runtime_error("train: cannot write log " + outputs.log->string());
    write_log_header(log);
  }
  std::vector<std::size_t> batch(static_cast<std::size_t>(config.batch_size));
  for (int s = 0; s < config.steps; ++s) {
    for (auto& b : batch) b = static_cast<std::size_t>(batch_rng.uniform_int(0, static_cast<std::int64_t>(clips.size()) - 1));
    const auto rows = train_step(model, optimizer, clips, batch, config, sample_root);
    if (log.is_open()) write_log_rows(log, model.step, rows);
    if (progress) progress(s + 1, rows);
    const bool last = s + 1 == config.steps;
    if (outputs.checkpoint && (last || (config.checkpoint_every > 0 && (s + 1) % config.checkpoint_every == 0))) {
      diffusion::save_checkpoint(*outputs.checkpoint, model);
    }
  }
  if (outputs.checkpoint && config.steps == 0) diffusion::save_checkpoint(*outputs.checkpoint, model);
}

}  // namespace anw::train
