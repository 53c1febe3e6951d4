#pragma once

#include <string>
#include <vector>

#include "drwr/errors.hpp"
#include "drwr/vec.hpp"

namespace drwr {

/// Ordered list of 3D points in object-centered coordinates.
struct PointCloud {
  std::vector<Vec3> points;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// ASCII XYZ, one "x y z" per line.
PointCloud load_xyz(const std::string& path);
void save_xyz(const PointCloud& cloud, const std::string& path);

/// Binary little-endian PLY with float32 vertex positions.
PointCloud load_ply(const std::string& path);
void save_ply(const PointCloud& cloud, const std::string& path);

/// Loads by extension (.xyz or .ply).
PointCloud load_cloud(const std::string& path);

}  // namespace drwr
