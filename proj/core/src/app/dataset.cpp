#include "anw/app/dataset.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "anw/numeric/tensor_io.hpp"
#include "anw/raster/rasterizer.hpp"

namespace anw::app {
namespace pt = boost::property_tree;

Clip make_clip(const RunConfig& config, const std::string& name, std::uint64_t seed) {
  Clip c;
  c.name = name;
  c.seed = seed;
  c.skeleton = body::Skeleton::default_humanoid();
  body::MotionOptions opts;
  opts.root_center = {config.data.width * 0.5, config.data.height * 0.54};
  opts.root_jitter = config.data.root_jitter;
  opts.root_sway = config.data.root_sway;
  Rng rng(seed);
  Rng pose_rng = rng.stream("poses");
  c.poses = body::generate_pose_sequence(c.skeleton, pose_rng, config.data.f, config.data.motion_amplitude, opts);
  c.maps = raster::rasterize_sequence(c.skeleton, c.poses, config.data.height, config.data.width);
  c.texture = raster::default_appearance_texture(config.data.appearance_size);
  c.video = raster::render_video(c.maps, c.texture);
  return c;
}

std::vector<Clip> make_clips(const RunConfig& config, const std::string& split, int count) {
  const Rng root = Rng(config.seed).stream("dataset").stream(split);
  std::vector<Clip> clips;
  for (int i = 0; i < count; ++i) {
    Rng r = root.stream(static_cast<std::uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof name, "clip_%03d", i);
    clips.push_back(make_clip(config, name, r.next_u64()));
  }
  return clips;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<Clip>& clips, const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  pt::ptree manifest;
  manifest.put("dataset.clips", clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const Clip& c = clips[i];
    const auto cdir = dir / c.name;
    std::filesystem::create_directories(cdir, ec);
    if (ec) throw std::runtime_error("cannot create " + cdir.string() + ": " + ec.message());
    save_tensor(cdir / "video.anwt", c.video);
    save_tensor(cdir / "motion.anwt", raster::motion_maps_to_tensor(c.maps));
    save_tensor(cdir / "poses.anwt", body::pose_sequence_to_tensor(c.poses));
    save_tensor(cdir / "texture.anwt", c.texture);
    body::save_skeleton(cdir / "skeleton.ini", c.skeleton);
    manifest.put("clip" + std::to_string(i) + ".name", c.name);
    manifest.put("clip" + std::to_string(i) + ".seed", c.seed);
  }
  std::ofstream os(dir / "manifest.ini");
  if (!os) throw std::runtime_error("cannot write " + (dir / "manifest.ini").string());
  pt::write_ini(os, manifest);
  os << "\n; configuration\n";
  std::istringstream cfg(config_text(config));
  for (std::string line; std::getline(cfg, line);) os << "; " << line << '\n';
}

std::vector<Clip> read_dataset(const std::filesystem::path& dir) {
  const auto mpath = dir / "manifest.ini";
  if (!std::filesystem::exists(mpath)) throw std::runtime_error("no dataset at " + dir.string() + " (missing manifest.ini)");
  pt::ptree manifest;
  pt::read_ini(mpath.string(), manifest);
  const auto n = manifest.get<std::size_t>("dataset.clips");
  std::vector<Clip> clips;
  for (std::size_t i = 0; i < n; ++i) {
    Clip c;
    c.name = manifest.get<std::string>("clip" + std::to_string(i) + ".name");
    c.seed = manifest.get<std::uint64_t>("clip" + std::to_string(i) + ".seed");
    const auto cdir = dir / c.name;
    c.video = load_tensor(cdir / "video.anwt");
    c.maps = raster::motion_maps_from_tensor(load_tensor(cdir / "motion.anwt"));
    c.poses = body::pose_sequence_from_tensor(load_tensor(cdir / "poses.anwt"));
    c.texture = load_tensor(cdir / "texture.anwt");
    c.skeleton = body::load_skeleton(cdir / "skeleton.ini");
    clips.push_back(std::move(c));
  }
  return clips;
}

train::TrainingClip training_clip(const Clip& clip) { return {clip.video, clip.maps}; }

}  // namespace anw::app
