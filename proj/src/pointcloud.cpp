#include "drwr/pointcloud.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace drwr {

namespace {

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

PointCloud load_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  PointCloud c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x >> p.y >> p.z)) throw IoError(path + ": bad XYZ line");
    c.points.push_back(p);
  }
  return c;
}

void save_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  for (const auto& p : cloud.points)
    out << p.x << " " << p.y << " " << p.z << "\n";
}

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw IoError(path + ": not a PLY file");
  size_t vertex_count = 0;
  bool little_endian = false;
  int props = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      little_endian = fmt == "binary_little_endian";
    } else if (tok == "element") {
      std::string name;
      ls >> name >> vertex_count;
      if (name != "vertex") throw IoError(path + ": unsupported PLY element");
    } else if (tok == "property") {
      std::string type;
      ls >> type;
      if (type != "float") throw IoError(path + ": only float properties supported");
      ++props;
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!little_endian) throw IoError(path + ": expected binary_little_endian PLY");
  if (props < 3) throw IoError(path + ": PLY needs x y z properties");

  PointCloud c;
  c.points.reserve(vertex_count);
  std::vector<float> buf(props);
  for (size_t i = 0; i < vertex_count; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), props * sizeof(float));
    if (!in) throw IoError(path + ": truncated PLY data");
    c.points.push_back(Vec3{buf[0], buf[1], buf[2]});
  }
  return c;
}

void save_ply(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "end_header\n";
  for (const auto& p : cloud.points) {
    const float xyz[3] = {static_cast<float>(p.x), static_cast<float>(p.y),
                          static_cast<float>(p.z)};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
}

PointCloud load_cloud(const std::string& path) {
  return has_suffix(path, ".ply") ? load_ply(path) : load_xyz(path);
}

}  // namespace drwr
