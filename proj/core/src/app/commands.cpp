#include "anw/app/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "anw/app/self_check.hpp"
#include "anw/numeric/tensor_io.hpp"
#include "anw/raster/pixmap.hpp"

namespace anw::app {
namespace {

std::string frame_name(const char* stem, std::int64_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03lld.%s", stem, static_cast<long long>(i), ext);
  return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

diffusion::Model require_checkpoint(const RunConfig& config) {
  if (!std::filesystem::exists(config.checkpoint)) {
    throw std::runtime_error("missing checkpoint " + config.checkpoint.string());
  }
  return diffusion::load_checkpoint(config.checkpoint);
}

}  // namespace

void cmd_gen_data(const RunConfig& config, std::ostream& out) {
  const auto train_clips = make_clips(config, "train", config.data.clips);
  write_dataset(config.data_dir / "train", train_clips, config);
  out << "wrote " << train_clips.size() << " clips to " << (config.data_dir / "train").string() << '\n';
  if (config.data.heldout_clips > 0) {
    const auto held = make_clips(config, "heldout", config.data.heldout_clips);
    write_dataset(config.data_dir / "heldout", held, config);
    out << "wrote " << held.size() << " clips to " << (config.data_dir / "heldout").string() << '\n';
  }
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  const auto clips = read_dataset(config.data_dir / "train");
  std::vector<train::PreparedClip> prepared;
  for (const auto& c : clips) prepared.push_back(train::prepare_clip(training_clip(c), config.codec));
  Rng rng = Rng(config.train.seed).stream("init");
  diffusion::Model model =
      diffusion::initialize_model(config.codec, config.schedule, config.denoiser_config(), config.decoder_config(), rng);
  ensure_dir(config.output_dir);
  if (config.checkpoint.has_parent_path()) ensure_dir(config.checkpoint.parent_path());
  write_text(config.output_dir / "run.ini", config_text(config));
  out << "training preset " << config.preset << " (lambda_diff=" << config.train.weights.diff
      << ", lambda_mc=" << config.train.weights.mc << ", lambda_md=" << config.train.weights.md << ") for "
      << config.train.steps << " steps on " << clips.size() << " clips\n";
  const int every = std::max(1, config.train.steps / 20);
  train::train(model, prepared, config.train, {config.checkpoint, config.output_dir / "train_log.csv"},
               [&](int step, const std::vector<train::LossBreakdown>& rows) {
                 if (step % every != 0 && step != config.train.steps) return;
                 double total = 0.0;
                 for (const auto& r : rows) total += r.total;
                 out << "step " << step << " loss " << total / static_cast<double>(rows.size()) << '\n';
               });
  out << "checkpoint " << config.checkpoint.string() << '\n';
}

AnimateInputs load_animate_inputs(const std::filesystem::path& reference, const std::filesystem::path& poses,
                                  const std::optional<std::filesystem::path>& skeleton) {
  AnimateInputs in;
  in.reference = load_tensor(reference);
  in.poses = body::pose_sequence_from_tensor(load_tensor(poses));
  if (skeleton) in.skeleton = body::load_skeleton(*skeleton);
  in.source = "reference=" + reference.string() + " poses=" + poses.string();
  return in;
}

AnimateInputs clip_animate_inputs(const std::filesystem::path& clip_dir) {
  AnimateInputs in;
  in.reference = load_tensor(clip_dir / "video.anwt").frame(0);
  in.poses = body::pose_sequence_from_tensor(load_tensor(clip_dir / "poses.anwt"));
  in.skeleton = body::load_skeleton(clip_dir / "skeleton.ini");
  in.source = "clip=" + clip_dir.string();
  return in;
}

void cmd_animate(const RunConfig& config, const AnimateInputs& inputs, std::ostream& out) {
  const diffusion::Model model = require_checkpoint(config);
  const Animation a = animate(model, inputs.reference, inputs.skeleton, inputs.poses, animate_options(config));
  ensure_dir(config.output_dir);
  for (std::int64_t f = 0; f < a.video.dim(0); ++f) {
    raster::write_ppm(config.output_dir / frame_name("frame", f, "ppm"), a.video.frame(f));
  }
  save_tensor(config.output_dir / "video.anwt", a.video);
  write_text(config.output_dir / "manifest.ini", "; animate " + inputs.source + "\n" + config_text(config));
  out << "wrote " << a.video.dim(0) << " frames to " << config.output_dir.string() << '\n';
}

std::vector<eval::ClipMetrics> cmd_eval(const std::filesystem::path& generated, const std::filesystem::path& ground_truth,
                                        const std::filesystem::path& report, std::ostream& out) {
  const auto clips = read_dataset(ground_truth);
  std::vector<eval::ClipMetrics> rows;
  for (const auto& c : clips) {
    const auto path = generated / c.name / "video.anwt";
    if (!std::filesystem::exists(path)) throw std::runtime_error("missing generated video " + path.string());
    eval::EvalOptions eo;
    eo.texture_u = c.texture.dim(0);
    eo.texture_v = c.texture.dim(1);
    rows.push_back(eval::evaluate_clip(c.name, load_tensor(path), c.video, c.maps, eo));
  }
  if (report.has_parent_path()) ensure_dir(report.parent_path());
  std::ofstream os(report);
  if (!os) throw std::runtime_error("cannot write " + report.string());
  eval::write_report_csv(os, rows);
  const auto mean = eval::aggregate(rows);
  out << "clips " << rows.size() << ": l1 " << mean.l1 << ", ssim " << mean.ssim << ", silhouette iou "
      << mean.silhouette_iou << ", flicker " << mean.flicker << '\n';
  return rows;
}

std::vector<SweepRow> sweep_gamma(const diffusion::Model& model, std::span<const Clip> clips,
                                  const AnimateOptions& options, std::span<const float> gammas) {
  std::vector<SweepRow> rows;
  for (float g : gammas) {
    if (!(g >= 0.0f && g <= 1.0f)) throw std::invalid_argument("sweep_gamma: gamma outside [0, 1]");
    AnimateOptions o = options;
    o.gamma = g;
    const auto per_clip = evaluate_model(model, clips, o);
    rows.push_back({g, eval::aggregate(per_clip)});
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "gamma,l1,masked_l1,ssim,silhouette_iou,flicker\n";
  for (const auto& r : rows) {
    os << r.gamma << ',' << std::setprecision(9) << r.metrics.l1 << ',' << r.metrics.masked_l1 << ','
       << r.metrics.ssim << ',' << r.metrics.silhouette_iou << ',' << r.metrics.flicker << '\n';
  }
}

std::vector<SweepRow> cmd_sweep_gamma(const RunConfig& config, std::span<const float> gammas, std::ostream& out) {
  const diffusion::Model model = require_checkpoint(config);
  const auto clips = read_dataset(config.data_dir / "heldout");
  const auto rows = sweep_gamma(model, clips, animate_options(config), gammas);
  ensure_dir(config.output_dir);
  std::ofstream os(config.output_dir / "sweep_gamma.csv");
  if (!os) throw std::runtime_error("cannot write sweep_gamma.csv");
  write_sweep_csv(os, rows);
  if (!rows.empty()) {
    const auto best = std::max_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
      return a.metrics.ssim < b.metrics.ssim;
    });
    out << "best ssim at gamma " << best->gamma << " (" << best->metrics.ssim << ")\n";
  }
  write_sweep_csv(out, rows);
  return rows;
}

bool cmd_check(std::ostream& out) {
  const auto results = run_self_check([&](const CheckResult& r) {
    print_result(out, r);
    out.flush();
  });
  std::size_t passed = 0;
  double seconds = 0.0;
  for (const auto& r : results) {
    passed += r.passed ? 1 : 0;
    seconds += r.seconds;
  }
  out << passed << "/" << results.size() << " property groups passed in " << std::fixed << std::setprecision(1)
      << seconds << " s" << std::defaultfloat << '\n';
  return passed == results.size();
}

void cmd_dump_noise(const RunConfig& config, const std::filesystem::path& clip_dir, std::ostream& out) {
  const auto maps = raster::motion_maps_from_tensor(load_tensor(clip_dir / "motion.anwt"));
  const Rng rng = Rng(config.seed).stream("dump_noise");
  Rng tex_rng = rng.stream("texture");
  Rng bg_rng = rng.stream("background");
  const Tensor tex = noise::sample_noise_texture(tex_rng, config.train.texture_u, config.train.texture_v,
                                                 std::max<std::int64_t>(3, config.codec.channels));
  const Tensor w = noise::warp(tex, maps, bg_rng, config.train.background);
  ensure_dir(config.output_dir);
  for (std::int64_t f = 0; f < w.dim(0); ++f) {
    raster::write_noise_ppm(config.output_dir / frame_name("noise", f, "ppm"), w.frame(f));
  }
  save_tensor(config.output_dir / "noise.anwt", w);
  out << "wrote " << w.dim(0) << " noise frames to " << config.output_dir.string() << '\n';
}

}  // namespace anw::app
