#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "anw/app/animate.hpp"

namespace anw::app {

/// Writes <data_dir>/train (data.clips clips) and <data_dir>/heldout
/// (data.heldout_clips clips, independent seeds).
void cmd_gen_data(const RunConfig& config, std::ostream& out);

/// Trains on <data_dir>/train with the configured preset. Writes the
/// checkpoint, <output_dir>/train_log.csv and <output_dir>/run.ini.
void cmd_train(const RunConfig& config, std::ostream& out);

struct AnimateInputs {
  Tensor reference;  // (H, W, 3)
  body::PoseSequence poses;
  body::Skeleton skeleton = body::Skeleton::default_humanoid();
  std::string source;  // recorded in the output manifest
};

/// Reference frame and pose sequence from ANWT files; default puppet unless a
/// skeleton INI is given.
AnimateInputs load_animate_inputs(const std::filesystem::path& reference, const std::filesystem::path& poses,
                                  const std::optional<std::filesystem::path>& skeleton);
/// First frame, poses and skeleton of a dataset clip directory.
AnimateInputs clip_animate_inputs(const std::filesystem::path& clip_dir);

/// Writes frame_NNN.ppm, video.anwt and manifest.ini into output_dir.
void cmd_animate(const RunConfig& config, const AnimateInputs& inputs, std::ostream& out);

/// Scores <generated>/<clip>/video.anwt against every clip of the dataset at
/// `ground_truth`; writes the CSV report to `report`.
std::vector<eval::ClipMetrics> cmd_eval(const std::filesystem::path& generated, const std::filesystem::path& ground_truth,
                                        const std::filesystem::path& report, std::ostream& out);

struct SweepRow {
  float gamma = 0.0f;
  eval::ClipMetrics metrics;  // aggregate over clips
};

std::vector<SweepRow> sweep_gamma(const diffusion::Model& model, std::span<const Clip> clips,
                                  const AnimateOptions& options, std::span<const float> gammas);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

/// Runs the sweep on <data_dir>/heldout, writes <output_dir>/sweep_gamma.csv
/// and reports the best-SSIM gamma.
std::vector<SweepRow> cmd_sweep_gamma(const RunConfig& config, std::span<const float> gammas, std::ostream& out);

/// Returns true when every property group passes.
bool cmd_check(std::ostream& out);

/// Writes the warped image-space noise of a clip as PPM frames.
void cmd_dump_noise(const RunConfig& config, const std::filesystem::path& clip_dir, std::ostream& out);

}  // namespace anw::app
