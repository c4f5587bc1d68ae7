// anw: data generation, training, animation, evaluation and self-check.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 check failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "anw/app/commands.hpp"
#include "anw/training/trainer.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;
constexpr int kCheckFailed = 3;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> preset;

  anw::app::RunConfig resolve(std::vector<std::string> extra = {}) const {
    std::vector<std::string> all = sets;
    if (preset) all.push_back("train.preset=" + *preset);
    all.insert(all.end(), extra.begin(), extra.end());
    if (config.empty()) return anw::app::load_config(nullptr, all);
    const std::filesystem::path path(config);
    return anw::app::load_config(&path, all);
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", c.sets, "Override, section.key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Articulated noise warping lab"};
  app.require_subcommand(1);

  Common gen_opts, train_opts, anim_opts, sweep_opts, dump_opts;

  auto* gen = app.add_subcommand("gen-data", "Render the synthetic puppet dataset");
  add_common(gen, gen_opts);

  auto* tr = app.add_subcommand("train", "Train the denoiser and motion decoder");
  add_common(tr, train_opts);
  tr->add_option("--preset", train_opts.preset, "Ablation preset")->check(CLI::IsMember({"base", "jaml", "full"}));

  std::string anim_reference, anim_poses, anim_skeleton, anim_clip;
  auto* anim = app.add_subcommand("animate", "Generate a video from a reference frame and a pose sequence");
  add_common(anim, anim_opts);
  anim->add_option("--clip", anim_clip, "Clip directory providing reference, poses and skeleton")->check(CLI::ExistingDirectory);
  anim->add_option("--reference", anim_reference, "Reference frame (ANWT, H x W x 3)")->check(CLI::ExistingFile);
  anim->add_option("--poses", anim_poses, "Pose sequence (ANWT)")->check(CLI::ExistingFile);
  anim->add_option("--skeleton", anim_skeleton, "Skeleton INI")->check(CLI::ExistingFile);

  std::string eval_generated, eval_truth, eval_report = "metrics.csv";
  auto* ev = app.add_subcommand("eval", "Score generated videos against ground-truth renders");
  ev->add_option("--generated", eval_generated, "Directory of <clip>/video.anwt")->required();
  ev->add_option("--ground-truth", eval_truth, "Dataset directory")->required();
  ev->add_option("--report", eval_report, "CSV output path");

  std::vector<float> gammas{0.1f, 0.3f, 0.5f, 0.7f, 1.0f};
  auto* sweep = app.add_subcommand("sweep-gamma", "Evaluate held-out clips across inference gamma values");
  add_common(sweep, sweep_opts);
  sweep->add_option("--gammas", gammas, "Gamma values")->delimiter(',');

  auto* check = app.add_subcommand("check", "Run the invariant self-check");

  std::string dump_clip;
  auto* dump = app.add_subcommand("dump-noise", "Write warped noise frames of a clip as PPM");
  add_common(dump, dump_opts);
  dump->add_option("--clip", dump_clip, "Clip directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) {
      anw::app::cmd_gen_data(gen_opts.resolve(), std::cout);
    } else if (*tr) {
      anw::app::cmd_train(train_opts.resolve(), std::cout);
    } else if (*anim) {
      anw::app::AnimateInputs in;
      if (!anim_clip.empty()) {
        in = anw::app::clip_animate_inputs(anim_clip);
      } else if (!anim_reference.empty() && !anim_poses.empty()) {
        std::optional<std::filesystem::path> skeleton;
        if (!anim_skeleton.empty()) skeleton = anim_skeleton;
        in = anw::app::load_animate_inputs(anim_reference, anim_poses, skeleton);
      } else {
        std::cerr << "animate: pass --clip or both --reference and --poses\n";
        return kUsage;
      }
      anw::app::cmd_animate(anim_opts.resolve(), in, std::cout);
    } else if (*ev) {
      anw::app::cmd_eval(eval_generated, eval_truth, eval_report, std::cout);
    } else if (*sweep) {
      anw::app::cmd_sweep_gamma(sweep_opts.resolve(), gammas, std::cout);
    } else if (*check) {
      return anw::app::cmd_check(std::cout) ? 0 : kCheckFailed;
    } else if (*dump) {
      anw::app::cmd_dump_noise(dump_opts.resolve(), dump_clip, std::cout);
    }
  } catch (const anw::app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return 0;
}
