#include "drwr/scenegen.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "drwr/rng.hpp"
#include "drwr/runtime.hpp"

namespace drwr {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ray {
  Vec3 origin;
  Vec3 dir;  // not normalized
};

bool hit_sphere(const Sphere& s, const Ray& r) {
  // |o + t d|^2 = radius^2, t > 0
  const double a = r.dir.dot(r.dir);
  const double b = 2.0 * r.origin.dot(r.dir);
  const double c = r.origin.dot(r.origin) - s.radius * s.radius;
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return false;
  const double sq = std::sqrt(disc);
  const double t1 = (-b + sq) / (2 * a);
  return t1 > 0;  // at least the far hit in front
}

bool hit_box(const Box& b, const Ray& r) {
  double tmin = 0.0;
  double tmax = std::numeric_limits<double>::infinity();
  const double o[3] = {r.origin.x, r.origin.y, r.origin.z};
  const double d[3] = {r.dir.x, r.dir.y, r.dir.z};
  const double e[3] = {b.half_extents.x, b.half_extents.y, b.half_extents.z};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (o[i] < -e[i] || o[i] > e[i]) return false;
      continue;
    }
    double t0 = (-e[i] - o[i]) / d[i];
    double t1 = (e[i] - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  return true;
}

double torus_implicit(const Torus& t, const Vec3& p) {
  const double sum = p.dot(p) + t.major * t.major - t.minor * t.minor;
  return sum * sum - 4.0 * t.major * t.major * (p.x * p.x + p.y * p.y);
}

bool hit_torus(const Torus& tor, const Ray& r) {
  // March the bounding-sphere interval and test the implicit sign; a
  // bracketing refinement sharpens grazing hits.
  const double bound = tor.major + tor.minor;
  const double a = r.dir.dot(r.dir);
  const double b = 2.0 * r.origin.dot(r.dir);
  const double c = r.origin.dot(r.origin) - bound * bound;
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return false;
  const double sq = std::sqrt(disc);
  double t0 = (-b - sq) / (2 * a);
  double t1 = (-b + sq) / (2 * a);
  if (t1 <= 0) return false;
  t0 = std::max(t0, 0.0);

  const int steps = 512;
  const double dt = (t1 - t0) / steps;
  for (int i = 0; i <= steps; ++i) {
    const double t = t0 + i * dt;
    if (torus_implicit(tor, r.origin + r.dir * t) <= 0.0) return true;
  }
  return false;
}

// Moller-Trumbore any-hit.
bool hit_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                  const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = d.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return false;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = o - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qvec = tvec.cross(e1);
  const double v = d.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return false;
  return e2.dot(qvec) * inv_det > 0.0;
}

bool hit_mesh(const TriangleMesh& m, const Ray& r) {
  for (const auto& f : m.faces)
    if (hit_triangle(r.origin, r.dir, m.vertices[f[0]], m.vertices[f[1]],
                     m.vertices[f[2]]))
      return true;
  return false;
}

bool hit_shape(const Shape& s, const Ray& r) {
  return std::visit(
      [&](const auto& kind) -> bool {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, Sphere>) return hit_sphere(kind, r);
        if constexpr (std::is_same_v<T, Box>) return hit_box(kind, r);
        if constexpr (std::is_same_v<T, Torus>) return hit_torus(kind, r);
        if constexpr (std::is_same_v<T, TriangleMesh>) return hit_mesh(kind, r);
      },
      s.kind);
}

template <bool Parallel>
SilhouetteImage rasterize_impl(const Shape& shape, const Camera& cam) {
  const int w = cam.image_width;
  const int h = cam.image_height;
  MaskGrid mask(w, h, uint8_t{0});
  const Vec3 center = camera_center(cam);
  const Mat33 inv = cam.matrix.linear_part().inverse();

#pragma omp parallel for schedule(static) num_threads(thread_count()) if (Parallel)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Ray ray{center, inv.apply({static_cast<double>(x),
                                       static_cast<double>(y), 1.0})};
      if (hit_shape(shape, ray)) mask(x, y) = 1;
    }

  SilhouetteImage img(std::move(mask));
  if (img.foreground_count() == 0)
    throw DegenerateViewError("rasterize_silhouette: shape not visible");
  return img;
}

}  // namespace

Shape make_sphere(double radius) {
  if (radius <= 0.0 || radius > 0.5)
    throw std::invalid_argument("sphere radius must be in (0, 0.5]");
  return Shape{Sphere{radius}};
}

Shape make_box(const Vec3& half_extents) {
  const auto bad = [](double e) { return e <= 0.0 || e > 0.5; };
  if (bad(half_extents.x) || bad(half_extents.y) || bad(half_extents.z))
    throw std::invalid_argument("box half extents must be in (0, 0.5]");
  return Shape{Box{half_extents}};
}

Shape make_torus(double major, double minor) {
  if (minor <= 0.0 || major <= minor || major + minor > 0.5)
    throw std::invalid_argument("torus must satisfy 0 < minor < major, major+minor <= 0.5");
  return Shape{Torus{major, minor}};
}

Shape make_mesh(TriangleMesh mesh) {
  if (mesh.vertices.empty() || mesh.faces.empty())
    throw std::invalid_argument("mesh must have vertices and faces");
  Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
  for (const auto& v : mesh.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  const Vec3 c = (lo + hi) * 0.5;
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  if (extent <= 0.0) throw std::invalid_argument("mesh is degenerate");
  const double scale = 1.0 / extent;  // fits the unit cube
  for (auto& v : mesh.vertices) v = (v - c) * scale;
  return Shape{std::move(mesh)};
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  TriangleMesh m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) throw IoError(path + ": bad vertex line");
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int i = 0; i < 3; ++i) {
        std::string tok;
        if (!(ls >> tok)) throw IoError(path + ": face needs 3 vertices");
        f[i] = std::stoi(tok.substr(0, tok.find('/'))) - 1;  // 1-based
        if (f[i] < 0) throw IoError(path + ": negative face index unsupported");
      }
      std::string extra;
      if (ls >> extra) throw IoError(path + ": only triangular faces supported");
      m.faces.push_back(f);
    }
  }
  for (const auto& f : m.faces)
    for (int idx : f)
      if (idx >= static_cast<int>(m.vertices.size()))
        throw IoError(path + ": face index out of range");
  return m;
}

CameraRig make_rig(int views, double elevation_deg, double distance,
                   double focal_px, int resolution) {
  if (views < 1) throw std::invalid_argument("rig needs at least one camera");
  if (distance <= 0.87)  // unit-cube circumradius
    throw std::invalid_argument("rig distance must clear the unit cube");
  CameraRig rig;
  rig.elevation_deg = elevation_deg;
  rig.distance = distance;
  rig.focal_px = focal_px;
  rig.resolution = resolution;
  const double el = elevation_deg * kPi / 180.0;
  for (int i = 0; i < views; ++i) {
    const double az = 2.0 * kPi * i / views;
    const Vec3 eye{distance * std::cos(el) * std::cos(az),
                   distance * std::cos(el) * std::sin(az),
                   distance * std::sin(el)};
    rig.cameras.push_back(look_at_camera(eye, Vec3{0, 0, 0}, Vec3{0, 0, 1},
                                         focal_px, resolution, resolution));
  }
  return rig;
}

SilhouetteImage rasterize_silhouette(const Shape& shape, const Camera& cam) {
  return rasterize_impl<true>(shape, cam);
}

SilhouetteImage rasterize_silhouette_serial(const Shape& shape, const Camera& cam) {
  return rasterize_impl<false>(shape, cam);
}

namespace {

PointCloud sample_sphere(const Sphere& s, int count, Rng& rng) {
  PointCloud c;
  c.points.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    c.points.push_back(Vec3{r * std::cos(phi), r * std::sin(phi), z} * s.radius);
  }
  return c;
}

PointCloud sample_box(const Box& b, int count, Rng& rng) {
  const Vec3 e = b.half_extents;
  // Face areas: +-x, +-y, +-z.
  const double ax = e.y * e.z, ay = e.x * e.z, az = e.x * e.y;
  const double total = 2 * (ax + ay + az);
  PointCloud c;
  c.points.reserve(count);
  for (int i = 0; i < count; ++i) {
    double pick = rng.uniform(0.0, total);
    const double u = rng.uniform(-1.0, 1.0);
    const double v = rng.uniform(-1.0, 1.0);
    Vec3 p;
    if (pick < 2 * ax) {
      p = {pick < ax ? e.x : -e.x, u * e.y, v * e.z};
    } else if (pick < 2 * ax + 2 * ay) {
      pick -= 2 * ax;
      p = {u * e.x, pick < ay ? e.y : -e.y, v * e.z};
    } else {
      pick -= 2 * ax + 2 * ay;
      p = {u * e.x, v * e.y, pick < az ? e.z : -e.z};
    }
    c.points.push_back(p);
  }
  return c;
}

PointCloud sample_torus(const Torus& t, int count, Rng& rng) {
  PointCloud c;
  c.points.reserve(count);
  // Area element is proportional to major + minor*cos(theta); rejection
  // sampling keeps the distribution uniform by area.
  while (static_cast<int>(c.points.size()) < count) {
    const double theta = rng.uniform(0.0, 2.0 * kPi);
    const double accept = (t.major + t.minor * std::cos(theta)) / (t.major + t.minor);
    if (rng.uniform() > accept) continue;
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double ring = t.major + t.minor * std::cos(theta);
    c.points.push_back(
        {ring * std::cos(phi), ring * std::sin(phi), t.minor * std::sin(theta)});
  }
  return c;
}

PointCloud sample_mesh(const TriangleMesh& m, int count, Rng& rng) {
  std::vector<double> cum(m.faces.size());
  double total = 0.0;
  for (size_t i = 0; i < m.faces.size(); ++i) {
    const auto& f = m.faces[i];
    const Vec3 e1 = m.vertices[f[1]] - m.vertices[f[0]];
    const Vec3 e2 = m.vertices[f[2]] - m.vertices[f[0]];
    total += 0.5 * e1.cross(e2).norm();
    cum[i] = total;
  }
  PointCloud c;
  c.points.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double pick = rng.uniform(0.0, total);
    const size_t fi =
        std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    const auto& f = m.faces[std::min(fi, m.faces.size() - 1)];
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3& a = m.vertices[f[0]];
    c.points.push_back(a + (m.vertices[f[1]] - a) * u + (m.vertices[f[2]] - a) * v);
  }
  return c;
}

}  // namespace

PointCloud sample_surface(const Shape& shape, int count, uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample count must be positive");
  Rng rng(seed);
  return std::visit(
      [&](const auto& kind) -> PointCloud {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, Sphere>) return sample_sphere(kind, count, rng);
        if constexpr (std::is_same_v<T, Box>) return sample_box(kind, count, rng);
        if constexpr (std::is_same_v<T, Torus>) return sample_torus(kind, count, rng);
        if constexpr (std::is_same_v<T, TriangleMesh>) return sample_mesh(kind, count, rng);
      },
      shape.kind);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }

  const auto& sj = j.at("shape");
  const std::string kind = sj.at("kind").get<std::string>();
  Shape shape = make_sphere(0.4);
  if (kind == "sphere") {
    shape = make_sphere(sj.value("radius", 0.4));
  } else if (kind == "box") {
    const auto he = sj.value("half_extents", std::vector<double>{0.35, 0.35, 0.35});
    if (he.size() != 3) throw IoError(path + ": half_extents needs 3 numbers");
    shape = make_box({he[0], he[1], he[2]});
  } else if (kind == "torus") {
    shape = make_torus(sj.value("major", 0.3), sj.value("minor", 0.12));
  } else if (kind == "mesh") {
    shape = make_mesh(load_obj(sj.at("obj").get<std::string>()));
  } else {
    throw IoError(path + ": unknown shape kind '" + kind + "'");
  }

  const auto& rj = j.at("rig");
  const int resolution = j.value("resolution", 64);
  const int views = rj.at("views").get<int>();
  if (views < 1) throw IoError(path + ": rig.views must be >= 1");
  CameraRig rig = make_rig(views, rj.value("elevation", 20.0),
                           rj.value("distance", 4.0),
                           rj.value("focal", resolution * 1.6), resolution);
  return Scene{std::move(shape), std::move(rig)};
}

nlohmann::json scene_to_json(const Scene& scene) {
  nlohmann::json j;
  std::visit(
      [&](const auto& kind) {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          j["shape"] = {{"kind", "sphere"}, {"radius", kind.radius}};
        } else if constexpr (std::is_same_v<T, Box>) {
          j["shape"] = {{"kind", "box"},
                        {"half_extents",
                         {kind.half_extents.x, kind.half_extents.y,
                          kind.half_extents.z}}};
        } else if constexpr (std::is_same_v<T, Torus>) {
          j["shape"] = {{"kind", "torus"}, {"major", kind.major}, {"minor", kind.minor}};
        } else {
          j["shape"] = {{"kind", "mesh"},
                        {"vertices", kind.vertices.size()},
                        {"faces", kind.faces.size()}};
        }
      },
      scene.shape.kind);
  j["rig"] = {{"views", scene.rig.cameras.size()},
              {"elevation", scene.rig.elevation_deg},
              {"distance", scene.rig.distance},
              {"focal", scene.rig.focal_px}};
  j["resolution"] = scene.rig.resolution;
  return j;
}

}  // namespace drwr
