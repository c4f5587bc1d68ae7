#include "anw/app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <map>
#include <set>
#include <sstream>

namespace anw::app {
namespace pt = boost::property_tree;

namespace {

std::string background_name(noise::BackgroundNoise b) {
  return b == noise::BackgroundNoise::kShared ? "shared" : "fresh";
}

noise::BackgroundNoise parse_background(const std::string& s) {
  if (s == "fresh") return noise::BackgroundNoise::kFreshPerFrame;
  if (s == "shared") return noise::BackgroundNoise::kShared;
  throw ConfigError("noise.background must be fresh or shared, got '" + s + "'");
}

pt::ptree to_tree(const RunConfig& c) {
  pt::ptree t;
  t.put("paths.data_dir", c.data_dir.string());
  t.put("paths.checkpoint", c.checkpoint.string());
  t.put("paths.output_dir", c.output_dir.string());
  t.put("run.seed", c.seed);
  t.put("data.height", c.data.height);
  t.put("data.width", c.data.width);
  t.put("data.f", c.data.f);
  t.put("data.clips", c.data.clips);
  t.put("data.heldout_clips", c.data.heldout_clips);
  t.put("data.motion_amplitude", c.data.motion_amplitude);
  t.put("data.root_jitter", c.data.root_jitter);
  t.put("data.root_sway", c.data.root_sway);
  t.put("data.appearance_size", c.data.appearance_size);
  t.put("codec.spatial", c.codec.spatial);
  t.put("codec.temporal", c.codec.temporal);
  t.put("codec.channels", c.codec.channels);
  t.put("codec.latent_shift", c.codec.latent_shift);
  t.put("codec.latent_scale", c.codec.latent_scale);
  t.put("noise.texture_u", c.train.texture_u);
  t.put("noise.texture_v", c.train.texture_v);
  t.put("noise.background", background_name(c.train.background));
  t.put("schedule.steps", c.schedule.steps);
  t.put("schedule.beta_start", c.schedule.beta_start);
  t.put("schedule.beta_end", c.schedule.beta_end);
  t.put("model.width1", c.model.width1);
  t.put("model.width2", c.model.width2);
  t.put("model.time_dim", c.model.time_dim);
  t.put("model.time_hidden", c.model.time_hidden);
  t.put("model.decoder_width1", c.model.decoder_width1);
  t.put("model.decoder_width2", c.model.decoder_width2);
  t.put("train.preset", c.preset);
  t.put("train.lambda_diff", c.train.weights.diff);
  t.put("train.lambda_mc", c.train.weights.mc);
  t.put("train.lambda_md", c.train.weights.md);
  t.put("train.lr", c.train.adam.lr);
  t.put("train.batch_size", c.train.batch_size);
  t.put("train.steps", c.train.steps);
  t.put("train.gamma_lo", c.train.gamma_lo);
  t.put("train.gamma_hi", c.train.gamma_hi);
  t.put("train.gamma_max", c.train.gamma_max);
  t.put("train.masked_md", c.train.masked_md);
  t.put("train.checkpoint_every", c.train.checkpoint_every);
  t.put("train.max_grad_norm", c.train.max_grad_norm);
  t.put("train.seed", c.train.seed);
  t.put("inference.gamma", c.inference.gamma);
  t.put("inference.ddim_steps", c.inference.ddim_steps);
  return t;
}

template <class T>
T get(const pt::ptree& t, const std::string& key) {
  try {
    return t.get<T>(key);
  } catch (const pt::ptree_error&) {
    throw ConfigError("malformed value for " + key + ": '" + t.get<std::string>(key, "") + "'");
  }
}

RunConfig from_tree(const pt::ptree& t) {
  RunConfig c;
  c.data_dir = get<std::string>(t, "paths.data_dir");
  c.checkpoint = get<std::string>(t, "paths.checkpoint");
  c.output_dir = get<std::string>(t, "paths.output_dir");
  c.seed = get<std::uint64_t>(t, "run.seed");
  c.data.height = get<std::int64_t>(t, "data.height");
  c.data.width = get<std::int64_t>(t, "data.width");
  c.data.f = get<int>(t, "data.f");
  c.data.clips = get<int>(t, "data.clips");
  c.data.heldout_clips = get<int>(t, "data.heldout_clips");
  c.data.motion_amplitude = get<double>(t, "data.motion_amplitude");
  c.data.root_jitter = get<double>(t, "data.root_jitter");
  c.data.root_sway = get<double>(t, "data.root_sway");
  c.data.appearance_size = get<std::int64_t>(t, "data.appearance_size");
  c.codec.spatial = get<std::int64_t>(t, "codec.spatial");
  c.codec.temporal = get<std::int64_t>(t, "codec.temporal");
  c.codec.channels = get<std::int64_t>(t, "codec.channels");
  c.codec.latent_shift = get<double>(t, "codec.latent_shift");
  c.codec.latent_scale = get<double>(t, "codec.latent_scale");
  c.train.texture_u = get<std::int64_t>(t, "noise.texture_u");
  c.train.texture_v = get<std::int64_t>(t, "noise.texture_v");
  c.train.background = parse_background(get<std::string>(t, "noise.background"));
  c.schedule.steps = get<int>(t, "schedule.steps");
  c.schedule.beta_start = get<double>(t, "schedule.beta_start");
  c.schedule.beta_end = get<double>(t, "schedule.beta_end");
  c.model.width1 = get<std::int64_t>(t, "model.width1");
  c.model.width2 = get<std::int64_t>(t, "model.width2");
  c.model.time_dim = get<std::int64_t>(t, "model.time_dim");
  c.model.time_hidden = get<std::int64_t>(t, "model.time_hidden");
  c.model.decoder_width1 = get<std::int64_t>(t, "model.decoder_width1");
  c.model.decoder_width2 = get<std::int64_t>(t, "model.decoder_width2");
  c.preset = get<std::string>(t, "train.preset");
  c.train.weights.diff = get<double>(t, "train.lambda_diff");
  c.train.weights.mc = get<double>(t, "train.lambda_mc");
  c.train.weights.md = get<double>(t, "train.lambda_md");
  c.train.adam.lr = get<double>(t, "train.lr");
  c.train.batch_size = get<int>(t, "train.batch_size");
  c.train.steps = get<int>(t, "train.steps");
  c.train.gamma_lo = get<double>(t, "train.gamma_lo");
  c.train.gamma_hi = get<double>(t, "train.gamma_hi");
  c.train.gamma_max = get<float>(t, "train.gamma_max");
  c.train.masked_md = get<bool>(t, "train.masked_md");
  c.train.checkpoint_every = get<int>(t, "train.checkpoint_every");
  c.train.max_grad_norm = get<double>(t, "train.max_grad_norm");
  c.train.seed = get<std::uint64_t>(t, "train.seed");
  c.inference.gamma = get<float>(t, "inference.gamma");
  c.inference.ddim_steps = get<int>(t, "inference.ddim_steps");
  return c;
}

// Applies `key = value`, rejecting keys the defaults do not define.
void assign(pt::ptree& t, const std::string& key, const std::string& value, std::set<std::string>& touched) {
  if (!t.get_optional<std::string>(key)) throw ConfigError("unknown config key '" + key + "'");
  t.put(key, value);
  touched.insert(key);
}

}  // namespace

diffusion::DenoiserConfig RunConfig::denoiser_config() const {
  return {codec.channels, model.width1, model.width2, model.time_dim, model.time_hidden};
}

diffusion::MotionDecoderConfig RunConfig::decoder_config() const {
  return {codec.channels, model.decoder_width1, model.decoder_width2, static_cast<int>(codec.spatial),
          static_cast<int>(codec.temporal)};
}

void validate(const RunConfig& c) {
  if (c.codec.spatial < 4 || c.codec.spatial % 4 != 0) throw ConfigError("codec.spatial must be a positive multiple of 4");
  if (c.codec.temporal < 1 || c.codec.channels < 3) throw ConfigError("codec.temporal >= 1 and codec.channels >= 3 required");
  if (!(c.codec.latent_scale > 0)) throw ConfigError("codec.latent_scale must be positive");
  if (!(c.train.max_grad_norm >= 0)) throw ConfigError("train.max_grad_norm must be >= 0");
  if (c.data.height < 8 || c.data.width < 8 || c.data.height % c.codec.spatial != 0 || c.data.width % c.codec.spatial != 0) {
    throw ConfigError("data.height and data.width must be >= 8 and divisible by codec.spatial");
  }
  if ((c.data.height / c.codec.spatial) % 2 != 0 || (c.data.width / c.codec.spatial) % 2 != 0) {
    throw ConfigError("latent height and width (data size / codec.spatial) must be even");
  }
  if (c.data.f < 1) throw ConfigError("data.f must be >= 1");
  if (c.codec.temporal != 4) throw ConfigError("codec.temporal must be 4 (clips have 4f+1 frames)");
  if (c.data.clips < 1 || c.data.heldout_clips < 0) throw ConfigError("data.clips must be >= 1");
  if (c.data.motion_amplitude < 0.0) throw ConfigError("data.motion_amplitude must be >= 0");
  if (c.train.texture_u < 1 || c.train.texture_v < 1) throw ConfigError("noise texture dimensions must be positive");
  if (!(c.inference.gamma >= 0.0f && c.inference.gamma <= 1.0f)) throw ConfigError("inference.gamma must lie in [0, 1]");
  if (!(c.train.gamma_lo >= 0.0 && c.train.gamma_lo <= c.train.gamma_hi && c.train.gamma_hi <= 1.0)) {
    throw ConfigError("train.gamma_lo/gamma_hi must satisfy 0 <= lo <= hi <= 1");
  }
  if (c.train.weights.diff < 0 || c.train.weights.mc < 0 || c.train.weights.md < 0) {
    throw ConfigError("loss weights must be nonnegative");
  }
  if (c.train.batch_size < 1 || c.train.steps < 0 || !(c.train.adam.lr > 0)) {
    throw ConfigError("train.batch_size >= 1, train.steps >= 0 and train.lr > 0 required");
  }
  if (c.inference.ddim_steps < 1 || c.inference.ddim_steps > c.schedule.steps) {
    throw ConfigError("inference.ddim_steps must lie in [1, schedule.steps]");
  }
  try {
    diffusion::make_schedule(c.schedule);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_config(const std::filesystem::path* file, const std::vector<std::string>& overrides) {
  pt::ptree tree = to_tree(RunConfig{});
  std::set<std::string> touched;
  if (file != nullptr) {
    pt::ptree in;
    try {
      pt::read_ini(file->string(), in);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    for (const auto& [section, body] : in) {
      if (body.empty()) throw ConfigError("config key '" + section + "' outside a section");
      for (const auto& [key, value] : body) assign(tree, section + "." + key, value.data(), touched);
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not section.key=value");
    assign(tree, o.substr(0, eq), o.substr(eq + 1), touched);
  }
  RunConfig c = from_tree(tree);
  // The preset fixes the loss weights unless they were given explicitly.
  const train::LossWeights explicit_weights = c.train.weights;
  try {
    train::apply_preset(c.train, c.preset);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (touched.count("train.lambda_diff")) c.train.weights.diff = explicit_weights.diff;
  if (touched.count("train.lambda_mc")) c.train.weights.mc = explicit_weights.mc;
  if (touched.count("train.lambda_md")) c.train.weights.md = explicit_weights.md;
  c.train.seed = c.train.seed == 0 ? c.seed : c.train.seed;
  validate(c);
  return c;
}

void write_config(std::ostream& os, const RunConfig& config) {
  pt::write_ini(os, to_tree(config));
}

std::string config_text(const RunConfig& config) {
  std::ostringstream os;
  write_config(os, config);
  return os.str();
}

}  // namespace anw::app
