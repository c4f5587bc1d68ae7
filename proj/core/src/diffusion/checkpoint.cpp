#include "anw/diffusion/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "anw/numeric/tensor_io.hpp"

namespace anw::diffusion {
namespace {

constexpr char kMagic[4] = {'A', 'N', 'W', 'C'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::string get_string(std::istream& is, std::uint32_t len) {
  if (len > (1u << 24)) throw std::runtime_error("checkpoint: implausible string length");
  std::string s(len, '\0');
  if (len > 0 && !is.read(s.data(), len)) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::map<std::string, std::string> parse_manifest(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

const std::string& require(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw std::runtime_error("checkpoint: manifest lacks " + key);
  return it->second;
}

std::int64_t as_int(const std::map<std::string, std::string>& m, const std::string& key) {
  return std::stoll(require(m, key));
}

std::map<std::string, std::string> read_header(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const std::uint32_t version = get_u32(is);
  if (version != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  return parse_manifest(get_string(is, get_u32(is)));
}

ParameterSet read_params(std::istream& is, const std::string& prefix, const ParameterSet& expected) {
  ParameterSet out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const std::string name = get_string(is, get_u32(is));
    if (name != prefix + expected.name(i)) throw std::runtime_error("checkpoint: expected tensor " + prefix + expected.name(i) + ", found " + name);
    Tensor t = read_tensor(is);
    if (t.shape() != expected.value(i).shape()) throw std::runtime_error("checkpoint: shape mismatch for " + name);
    out.add(expected.name(i), std::move(t));
  }
  return out;
}

}  // namespace

std::string Model::signature() const {
  std::ostringstream os;
  os << "codec s=" << codec.spatial << " r=" << codec.temporal << " C=" << codec.channels << "; "
     << denoiser.config().signature() << "; " << decoder.config().signature();
  return os.str();
}

Model initialize_model(const LatentCodec& codec, const ScheduleConfig& schedule, const DenoiserConfig& denoiser,
                       const MotionDecoderConfig& decoder, Rng& rng) {
  if (denoiser.channels != codec.channels || decoder.channels != codec.channels) {
    throw std::invalid_argument("initialize_model: latent channel counts disagree");
  }
  if (decoder.spatial != codec.spatial || decoder.temporal != codec.temporal) {
    throw std::invalid_argument("initialize_model: decoder factors disagree with the codec");
  }
  make_schedule(schedule);
  Model m;
  m.codec = codec;
  m.schedule = schedule;
  Rng den_rng = rng.stream("denoiser");
  Rng dec_rng = rng.stream("motion_decoder");
  m.denoiser = Denoiser::initialize(denoiser, den_rng);
  m.decoder = MotionDecoder::initialize(decoder, dec_rng);
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  const auto& dc = model.denoiser.config();
  const auto& mc = model.decoder.config();
  std::ostringstream man;
  man << "signature = " << model.signature() << '\n'
      << "step = " << model.step << '\n'
      << "codec.spatial = " << model.codec.spatial << '\n'
      << "codec.temporal = " << model.codec.temporal << '\n'
      << "codec.channels = " << model.codec.channels << '\n'
      << "codec.latent_shift = " << format_double(model.codec.latent_shift) << '\n'
      << "codec.latent_scale = " << format_double(model.codec.latent_scale) << '\n'
      << "schedule.steps = " << model.schedule.steps << '\n'
      << "schedule.beta_start = " << format_double(model.schedule.beta_start) << '\n'
      << "schedule.beta_end = " << format_double(model.schedule.beta_end) << '\n'
      << "denoiser.width1 = " << dc.width1 << '\n'
      << "denoiser.width2 = " << dc.width2 << '\n'
      << "denoiser.time_dim = " << dc.time_dim << '\n'
      << "denoiser.time_hidden = " << dc.time_hidden << '\n'
      << "decoder.width1 = " << mc.width1 << '\n'
      << "decoder.width2 = " << mc.width2 << '\n';
  const std::string manifest = man.str();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot write " + path.string());
  os.write(kMagic, 4);
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(manifest.size()));
  os.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  put_u32(os, static_cast<std::uint32_t>(model.denoiser.params().size() + model.decoder.params().size()));
  auto write_set = [&](const std::string& prefix, const ParameterSet& set) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      const std::string name = prefix + set.name(i);
      put_u32(os, static_cast<std::uint32_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_tensor(os, set.value(i));
    }
  };
  write_set("denoiser.", model.denoiser.params());
  write_set("decoder.", model.decoder.params());
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

std::map<std::string, std::string> read_checkpoint_manifest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
  return read_header(is);
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
  const auto man = read_header(is);

  Model m;
  m.codec = {as_int(man, "codec.spatial"), as_int(man, "codec.temporal"), as_int(man, "codec.channels"),
             std::stod(require(man, "codec.latent_shift")), std::stod(require(man, "codec.latent_scale"))};
  m.schedule = {static_cast<int>(as_int(man, "schedule.steps")), std::stod(require(man, "schedule.beta_start")),
                std::stod(require(man, "schedule.beta_end"))};
  m.step = as_int(man, "step");
  DenoiserConfig dc{m.codec.channels, as_int(man, "denoiser.width1"), as_int(man, "denoiser.width2"),
                    as_int(man, "denoiser.time_dim"), as_int(man, "denoiser.time_hidden")};
  MotionDecoderConfig mc{m.codec.channels, as_int(man, "decoder.width1"), as_int(man, "decoder.width2"),
                         static_cast<int>(m.codec.spatial), static_cast<int>(m.codec.temporal)};
  // Shapes of a fresh instance define what the file must contain.
  Rng rng(0);
  const Denoiser den_proto = Denoiser::initialize(dc, rng);
  const MotionDecoder dec_proto = MotionDecoder::initialize(mc, rng);

  const std::uint32_t count = get_u32(is);
  if (count != den_proto.params().size() + dec_proto.params().size()) {
    throw std::runtime_error("checkpoint: tensor count does not match architecture");
  }
  m.denoiser = Denoiser(dc, read_params(is, "denoiser.", den_proto.params()));
  m.decoder = MotionDecoder(mc, read_params(is, "decoder.", dec_proto.params()));
  if (require(man, "signature") != m.signature()) throw std::runtime_error("checkpoint: architecture signature mismatch");
  return m;
}

}  // namespace anw::diffusion
