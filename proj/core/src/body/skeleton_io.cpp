#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "anw/body/skeleton.hpp"

namespace anw::body {

void save_skeleton(const std::filesystem::path& path, const Skeleton& skeleton) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  os << "[skeleton]\nbones = " << skeleton.size() << "\n";
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    const Bone& b = skeleton[i];
    os << "\n[bone" << i << "]\n"
       << "name = " << b.name << "\n"
       << "parent = " << b.parent << "\n"
       << "rest_length = " << b.rest_length << "\n"
       << "rest_angle = " << b.rest_angle << "\n"
       << "half_width = " << b.half_width << "\n"
       << "attach = " << b.attach << "\n"
       << "chart = " << b.chart.u0 << ' ' << b.chart.v0 << ' ' << b.chart.u1 << ' ' << b.chart.v1 << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Skeleton load_skeleton(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::runtime_error("skeleton file " + path.string() + ": " + e.message());
  }
  const auto count = tree.get<std::size_t>("skeleton.bones");
  std::vector<Bone> bones(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& sec = tree.get_child("bone" + std::to_string(i));
    Bone& b = bones[i];
    b.name = sec.get<std::string>("name", "bone" + std::to_string(i));
    b.parent = sec.get<int>("parent");
    b.rest_length = sec.get<double>("rest_length");
    b.rest_angle = sec.get<double>("rest_angle", 0.0);
    b.half_width = sec.get<double>("half_width");
    b.attach = sec.get<double>("attach", 1.0);
    std::istringstream chart(sec.get<std::string>("chart"));
    if (!(chart >> b.chart.u0 >> b.chart.v0 >> b.chart.u1 >> b.chart.v1)) {
      throw std::runtime_error("skeleton file " + path.string() + ": bone" + std::to_string(i) +
                               " chart needs four numbers");
    }
  }
  return Skeleton(std::move(bones));
}

}  // namespace anw::body
