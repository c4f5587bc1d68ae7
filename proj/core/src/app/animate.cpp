#include "anw/app/animate.hpp"

#include "anw/diffusion/sampler.hpp"
#include "anw/raster/rasterizer.hpp"

namespace anw::app {

AnimateOptions animate_options(const RunConfig& config) {
  AnimateOptions o;
  o.gamma = config.inference.gamma;
  o.ddim_steps = config.inference.ddim_steps;
  o.texture_u = config.train.texture_u;
  o.texture_v = config.train.texture_v;
  o.background = config.train.background;
  o.seed = config.seed;
  return o;
}

Animation animate(const diffusion::Model& model, const Tensor& reference_frame, const body::Skeleton& skeleton,
                  const body::PoseSequence& poses, const AnimateOptions& options) {
  if (reference_frame.rank() != 3 || reference_frame.dim(2) != 3) {
    throw ShapeError("animate: reference frame must be (H, W, 3), got " + shape_string(reference_frame.shape()));
  }
  const auto& codec = model.codec;
  const auto schedule = diffusion::make_schedule(model.schedule);
  Animation a;
  a.maps = raster::rasterize_sequence(skeleton, poses, reference_frame.dim(0), reference_frame.dim(1));

  const Rng rng = Rng(options.seed).stream("animate");
  Rng tex_rng = rng.stream("texture");
  Rng bg_rng = rng.stream("background");
  Rng zeta_rng = rng.stream("zeta");
  const Tensor texture = noise::sample_noise_texture(tex_rng, options.texture_u, options.texture_v, codec.channels);
  const Tensor eps = noise::downsample_spatiotemporal(noise::warp(texture, a.maps, bg_rng, options.background),
                                                      codec.spatial, codec.temporal);
  const Tensor zeta = sample_standard_normal(zeta_rng, eps.shape());
  a.init_noise = noise::degrade(eps, zeta, options.gamma);

  const Tensor reference = codec.normalize(codec.encode_frame(reference_frame));
  const auto predictor = [&](const Tensor& z, int t) { return model.denoiser.predict(z, reference, t); };
  a.latent = diffusion::ddim_sample(predictor, a.init_noise, schedule,
                                    diffusion::ddim_timesteps(schedule.steps(), options.ddim_steps));
  a.video = codec.decode(codec.denormalize(a.latent));
  return a;
}

std::vector<eval::ClipMetrics> evaluate_model(const diffusion::Model& model, std::span<const Clip> clips,
                                              const AnimateOptions& options) {
  std::vector<eval::ClipMetrics> rows;
  eval::EvalOptions eo;
  eo.texture_u = clips.empty() ? 64 : clips.front().texture.dim(0);
  eo.texture_v = clips.empty() ? 64 : clips.front().texture.dim(1);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const Clip& c = clips[i];
    AnimateOptions o = options;
    o.seed = options.seed + i;
    const Animation a = animate(model, c.video.frame(0), c.skeleton, c.poses, o);
    rows.push_back(eval::evaluate_clip(c.name, a.video, c.video, c.maps, eo));
  }
  return rows;
}

}  // namespace anw::app
