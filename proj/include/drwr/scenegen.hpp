#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "drwr/camera.hpp"
#include "drwr/pointcloud.hpp"
#include "drwr/silhouette.hpp"

#include <json.hpp>

namespace drwr {

struct Sphere {
  double radius = 0.4;
};

struct Box {
  Vec3 half_extents{0.35, 0.35, 0.35};
};

/// Torus around the z axis.
struct Torus {
  double major = 0.3;
  double minor = 0.12;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

/// A shape normalized to fit inside the unit cube centered at the origin.
struct Shape {
  std::variant<Sphere, Box, Torus, TriangleMesh> kind;
};

Shape make_sphere(double radius);
Shape make_box(const Vec3& half_extents);
Shape make_torus(double major, double minor);
/// Meshes are translated and uniformly scaled into the unit cube.
Shape make_mesh(TriangleMesh mesh);

/// OBJ reader restricted to v/f records with triangular faces.
TriangleMesh load_obj(const std::string& path);

struct CameraRig {
  std::vector<Camera> cameras;
  double elevation_deg = 20.0;
  double distance = 4.0;
  double focal_px = 0.0;
  int resolution = 64;
};

/// I cameras at equally spaced azimuths looking at the origin.
CameraRig make_rig(int views, double elevation_deg, double distance,
                   double focal_px, int resolution);

/// Binary silhouette: pixel = 1 iff the pixel-center ray hits the shape.
/// Throws DegenerateViewError when no pixel is covered.
SilhouetteImage rasterize_silhouette(const Shape& shape, const Camera& cam);
SilhouetteImage rasterize_silhouette_serial(const Shape& shape, const Camera& cam);

/// Uniform-by-area surface samples, deterministic per seed.
PointCloud sample_surface(const Shape& shape, int count, uint64_t seed);

/// Scene description JSON: {"shape": {...}, "rig": {...}, "resolution": int}.
struct Scene {
  Shape shape;
  CameraRig rig;
};

Scene load_scene(const std::string& path);
nlohmann::json scene_to_json(const Scene& scene);

}  // namespace drwr
