#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "anw/app/config.hpp"
#include "anw/body/skeleton.hpp"

namespace anw::app {

/// One synthetic clip: a puppet performing a pose sequence, its motion maps
/// and the appearance render.
struct Clip {
  std::string name;
  std::uint64_t seed = 0;
  body::Skeleton skeleton;
  body::PoseSequence poses;
  std::vector<raster::MotionMap> maps;
  Tensor texture;  // appearance atlas (S, S, 3)
  Tensor video;    // (4f+1, H, W, 3)
};

/// Deterministic clip from its seed and the data settings.
Clip make_clip(const RunConfig& config, const std::string& name, std::uint64_t seed);

/// `count` clips whose seeds derive from (config.seed, split).
std::vector<Clip> make_clips(const RunConfig& config, const std::string& split, int count);

/// Writes <dir>/<clip>/{video,motion,poses,texture}.anwt and skeleton.ini,
/// plus <dir>/manifest.ini listing clip names and seeds followed by the
/// resolved configuration. Throws std::runtime_error on unwritable paths.
void write_dataset(const std::filesystem::path& dir, const std::vector<Clip>& clips, const RunConfig& config);

/// Reads every clip listed in <dir>/manifest.ini. Throws std::runtime_error
/// when the directory or a clip file is missing.
std::vector<Clip> read_dataset(const std::filesystem::path& dir);

train::TrainingClip training_clip(const Clip& clip);

}  // namespace anw::app
