#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "anw/diffusion/checkpoint.hpp"
#include "anw/training/trainer.hpp"

namespace anw::app {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DataConfig {
  std::int64_t height = 96;
  std::int64_t width = 128;
  int f = 2;  // clips have 4f+1 frames
  int clips = 16;
  int heldout_clips = 4;
  double motion_amplitude = 0.6;
  double root_jitter = 6.0;
  double root_sway = 0.0;
  std::int64_t appearance_size = 64;
};

struct ModelConfig {
  std::int64_t width1 = 32;
  std::int64_t width2 = 64;
  std::int64_t time_dim = 32;
  std::int64_t time_hidden = 64;
  std::int64_t decoder_width1 = 16;
  std::int64_t decoder_width2 = 16;
};

struct InferenceConfig {
  float gamma = 0.1f;
  int ddim_steps = 20;
};

struct RunConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path checkpoint = "model.anwc";
  std::filesystem::path output_dir = "out";
  DataConfig data;
  // Standardizes the desk-scale RGB latents (mean ~0.18, std ~0.1).
  diffusion::LatentCodec codec{8, 4, 8, 0.18, 10.0};
  diffusion::ScheduleConfig schedule;
  ModelConfig model;
  std::string preset = "full";
  train::TrainConfig train;
  InferenceConfig inference;
  std::uint64_t seed = 0;

  diffusion::DenoiserConfig denoiser_config() const;
  diffusion::MotionDecoderConfig decoder_config() const;
};

/// Throws ConfigError on cross-field violations: H, W divisible by s; s a
/// multiple of 4; gamma in [0, 1]; nonnegative loss weights; positive sizes.
void validate(const RunConfig& config);

/// Defaults, then the INI file (if any), then "section.key=value" overrides.
/// Unknown sections or keys and malformed values raise ConfigError. The
/// preset is applied before explicit [train] lambda_* keys.
RunConfig load_config(const std::filesystem::path* file, const std::vector<std::string>& overrides = {});

/// Resolved configuration in the INI syntax accepted by load_config.
void write_config(std::ostream& os, const RunConfig& config);
std::string config_text(const RunConfig& config);

}  // namespace anw::app
