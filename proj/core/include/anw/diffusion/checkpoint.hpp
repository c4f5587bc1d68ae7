#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "anw/diffusion/codec.hpp"
#include "anw/diffusion/denoiser.hpp"
#include "anw/diffusion/motion_decoder.hpp"
#include "anw/diffusion/schedule.hpp"

namespace anw::diffusion {

/// Everything needed to resume training or run inference.
struct Model {
  LatentCodec codec;
  ScheduleConfig schedule;
  Denoiser denoiser;
  MotionDecoder decoder;
  std::int64_t step = 0;

  std::string signature() const;
};

/// Fresh model; the denoiser output layer starts at zero.
Model initialize_model(const LatentCodec& codec, const ScheduleConfig& schedule, const DenoiserConfig& denoiser,
                       const MotionDecoderConfig& decoder, Rng& rng);

/// Checkpoint layout (little-endian):
///   "ANWC" | version u32 | manifest_len u32 | manifest bytes (key = value lines)
///   | tensor_count u32 | { name_len u32 | name | ANWT record } x tensor_count
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Model& model);
/// Throws std::runtime_error on unreadable or malformed files, including a
/// parameter list that does not match the manifest's architecture.
Model load_checkpoint(const std::filesystem::path& path);
/// Manifest entries only.
std::map<std::string, std::string> read_checkpoint_manifest(const std::filesystem::path& path);

}  // namespace anw::diffusion
