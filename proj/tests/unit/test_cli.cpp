#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "anw/app/commands.hpp"
#include "anw/app/config.hpp"
#include "anw/numeric/tensor_io.hpp"
#include "oracles.hpp"

using namespace anw;
using namespace anw::app;

namespace {

const std::string kCli = ANW_CLI_PATH;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

// Small data and model so the whole pipeline runs in seconds.
std::string small_flags(const std::filesystem::path& root) {
  return " -s paths.data_dir=" + oracle::quote(root / "data") + " -s paths.checkpoint=" +
         oracle::quote(root / "model.anwc") + " -s data.clips=2 -s data.heldout_clips=1 -s model.width1=8" +
         " -s model.width2=8 -s model.time_dim=8 -s model.time_hidden=8 -s model.decoder_width1=4" +
         " -s model.decoder_width2=4 -s inference.ddim_steps=4";
}

}  // namespace

TEST(Config, DeskScaleDefaults) {
  const RunConfig c = load_config(nullptr);
  EXPECT_EQ(c.data.height, 96);
  EXPECT_EQ(c.data.width, 128);
  EXPECT_EQ(c.data.f, 2);
  EXPECT_EQ(c.codec.spatial, 8);
  EXPECT_EQ(c.codec.temporal, 4);
  EXPECT_EQ(c.codec.channels, 8);
  EXPECT_EQ(c.train.texture_u, 64);
  EXPECT_EQ(c.train.texture_v, 64);
  EXPECT_EQ(c.schedule.steps, 200);
  EXPECT_EQ(c.train.batch_size, 2);
  EXPECT_DOUBLE_EQ(c.train.adam.lr, 1e-4);
  EXPECT_DOUBLE_EQ(c.train.max_grad_norm, 1.0);
  EXPECT_DOUBLE_EQ(c.codec.latent_shift, 0.18);
  EXPECT_DOUBLE_EQ(c.codec.latent_scale, 10.0);
  EXPECT_EQ(c.preset, "full");
  EXPECT_FLOAT_EQ(c.inference.gamma, 0.1f);
}

TEST(Config, PresetsSetLossWeights) {
  const auto weights = [](const std::string& p) {
    return load_config(nullptr, {"train.preset=" + p}).train.weights;
  };
  EXPECT_EQ(weights("base").mc, 0.0);
  EXPECT_EQ(weights("base").md, 0.0);
  EXPECT_GT(weights("jaml").md, 0.0);
  EXPECT_EQ(weights("jaml").mc, 0.0);
  EXPECT_GT(weights("full").mc, 0.0);
  EXPECT_GT(weights("full").md, 0.0);
  // Explicit weights win over the preset.
  EXPECT_EQ(load_config(nullptr, {"train.lambda_mc=2", "train.preset=base"}).train.weights.mc, 2.0);
  EXPECT_THROW(load_config(nullptr, {"train.preset=huge"}), std::invalid_argument);
}

TEST(Config, FileThenOverrides) {
  oracle::TempDir dir("anw_cfg");
  {
    std::ofstream f(dir.path / "a.ini");
    f << "[data]\nclips = 5\n[train]\nlr = 0.002\nsteps = 7\n";
  }
  const auto path = dir.path / "a.ini";
  const RunConfig c = load_config(&path, {"train.steps=9"});
  EXPECT_EQ(c.data.clips, 5);
  EXPECT_DOUBLE_EQ(c.train.adam.lr, 0.002);
  EXPECT_EQ(c.train.steps, 9);
  EXPECT_EQ(c.data.height, 96);
}

TEST(Config, ResolvedTextRoundTrips) {
  oracle::TempDir dir("anw_cfg");
  const RunConfig c = load_config(nullptr, {"data.clips=3", "inference.gamma=0.4", "train.preset=jaml", "run.seed=77"});
  {
    std::ofstream f(dir.path / "r.ini");
    write_config(f, c);
  }
  const auto path = dir.path / "r.ini";
  const RunConfig d = load_config(&path);
  EXPECT_EQ(config_text(d), config_text(c));
  EXPECT_EQ(d.seed, 77u);
  EXPECT_EQ(d.preset, "jaml");
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(load_config(nullptr, {"train.nope=1"}), ConfigError);
  EXPECT_THROW(load_config(nullptr, {"nokey"}), ConfigError);
  EXPECT_THROW(load_config(nullptr, {"data.clips=many"}), ConfigError);
  EXPECT_THROW(load_config(nullptr, {"data.height=100"}), ConfigError);  // not divisible by s
  EXPECT_THROW(load_config(nullptr, {"inference.gamma=1.5"}), ConfigError);
  EXPECT_THROW(load_config(nullptr, {"train.lambda_md=-1"}), ConfigError);
  const std::filesystem::path missing = "/nonexistent/anw.ini";
  EXPECT_THROW(load_config(&missing), std::exception);
}

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(oracle::run(kCli).exit_code, 1);
  EXPECT_EQ(oracle::run(kCli + " frobnicate").exit_code, 1);
  EXPECT_EQ(oracle::run(kCli + " gen-data -s data.bogus=1").exit_code, 1);
  EXPECT_EQ(oracle::run(kCli + " train --preset huge").exit_code, 1);
  EXPECT_EQ(oracle::run(kCli + " --help").exit_code, 0);
}

TEST(Cli, MissingCheckpointIsARuntimeFailure) {
  oracle::TempDir dir("anw_cli");
  ASSERT_EQ(oracle::run(kCli + " gen-data" + small_flags(dir.path)).exit_code, 0);
  const auto r = oracle::run(kCli + " animate --clip " + oracle::quote(dir.path / "data/heldout/clip_000") +
                             small_flags(dir.path) + " -s paths.output_dir=" + oracle::quote(dir.path / "anim"));
  EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST(Cli, GenDataLayoutAndDeterminism) {
  oracle::TempDir dir("anw_cli");
  ASSERT_EQ(oracle::run(kCli + " gen-data" + small_flags(dir.path)).exit_code, 0);
  const auto clip = dir.path / "data/train/clip_001";
  for (const char* f : {"video.anwt", "motion.anwt", "poses.anwt", "texture.anwt", "skeleton.ini"}) {
    EXPECT_TRUE(std::filesystem::exists(clip / f)) << f;
  }
  EXPECT_TRUE(std::filesystem::exists(dir.path / "data/heldout/clip_000/video.anwt"));
  EXPECT_FALSE(std::filesystem::exists(dir.path / "data/heldout/clip_001"));
  const Tensor v = load_tensor(clip / "video.anwt");
  EXPECT_EQ(v.shape(), (Shape{9, 96, 128, 3}));

  const std::string first = read_file(clip / "video.anwt");
  const std::string manifest = read_file(dir.path / "data/train/manifest.ini");
  EXPECT_NE(manifest.find("clips=2"), std::string::npos);
  ASSERT_EQ(oracle::run(kCli + " gen-data" + small_flags(dir.path)).exit_code, 0);
  EXPECT_EQ(read_file(clip / "video.anwt"), first);
  EXPECT_EQ(read_file(dir.path / "data/train/manifest.ini"), manifest);
}

TEST(Cli, TrainAnimateEvalSweep) {
  oracle::TempDir dir("anw_cli");
  const std::string flags = small_flags(dir.path);
  ASSERT_EQ(oracle::run(kCli + " gen-data" + flags).exit_code, 0);

  const auto tr = oracle::run(kCli + " train --preset full" + flags + " -s train.steps=50 -s train.checkpoint_every=0" +
                              " -s paths.output_dir=" + oracle::quote(dir.path / "run"));
  ASSERT_EQ(tr.exit_code, 0) << tr.output;
  EXPECT_TRUE(std::filesystem::exists(dir.path / "model.anwc"));
  const std::string log = read_file(dir.path / "run/train_log.csv");
  EXPECT_GE(line_count(log), 51u);
  EXPECT_NE(read_file(dir.path / "run/run.ini").find("preset=full"), std::string::npos);

  const auto clip = oracle::quote(dir.path / "data/heldout/clip_000");
  const auto animate = [&](const std::string& out) {
    return oracle::run(kCli + " animate --clip " + clip + flags + " -s paths.output_dir=" + oracle::quote(dir.path / out));
  };
  ASSERT_EQ(animate("a1").exit_code, 0);
  ASSERT_EQ(animate("a2").exit_code, 0);
  EXPECT_EQ(read_file(dir.path / "a1/video.anwt"), read_file(dir.path / "a2/video.anwt"));
  EXPECT_TRUE(std::filesystem::exists(dir.path / "a1/frame_008.ppm"));
  EXPECT_NE(read_file(dir.path / "a1/manifest.ini").find("[train]"), std::string::npos);

  // The dataset itself has the <clip>/video.anwt layout eval expects.
  const auto heldout = oracle::quote(dir.path / "data/heldout");
  const auto ev = oracle::run(kCli + " eval --generated " + heldout + " --ground-truth " + heldout + " --report " +
                              oracle::quote(dir.path / "same.csv"));
  ASSERT_EQ(ev.exit_code, 0) << ev.output;
  const std::string csv = read_file(dir.path / "same.csv");
  EXPECT_EQ(line_count(csv), 3u);
  EXPECT_NE(csv.find("clip_000,0,0,1,1,"), std::string::npos) << csv;

  const auto missing = oracle::run(kCli + " eval --generated " + oracle::quote(dir.path / "a1") + " --ground-truth " +
                                   heldout + " --report " + oracle::quote(dir.path / "x.csv"));
  EXPECT_EQ(missing.exit_code, 2);

  const auto sw = oracle::run(kCli + " sweep-gamma --gammas 0,0.1,0.5,1" + flags + " -s paths.output_dir=" +
                              oracle::quote(dir.path / "sweep"));
  ASSERT_EQ(sw.exit_code, 0) << sw.output;
  EXPECT_EQ(line_count(read_file(dir.path / "sweep/sweep_gamma.csv")), 5u);
  EXPECT_NE(sw.output.find("best ssim at gamma"), std::string::npos);
  EXPECT_EQ(oracle::run(kCli + " sweep-gamma --gammas 2" + flags).exit_code, 2);
}

TEST(Cli, DumpNoiseWritesFrames) {
  oracle::TempDir dir("anw_cli");
  const std::string flags = small_flags(dir.path);
  ASSERT_EQ(oracle::run(kCli + " gen-data" + flags).exit_code, 0);
  const auto r = oracle::run(kCli + " dump-noise --clip " + oracle::quote(dir.path / "data/train/clip_000") + flags +
                             " -s paths.output_dir=" + oracle::quote(dir.path / "noise"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(load_tensor(dir.path / "noise/noise.anwt").dim(0), 9);
}
