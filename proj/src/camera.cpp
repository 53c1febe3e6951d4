#include "drwr/camera.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace drwr {

Camera make_camera(const Mat34& matrix, int width, int height) {
  if (width < 2 || height < 2)
    throw std::invalid_argument("camera image size must be at least 2x2");
  if (std::abs(matrix.linear_part().det()) < 1e-12)
    throw std::invalid_argument("camera matrix has a singular linear part");
  return Camera{matrix, width, height};
}

Mat33 axis_angle_rotation(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  Mat33 r;
  if (angle < 1e-14) {
    r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return r;
  }
  const Vec3 a = axis_angle * (1.0 / angle);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double t = 1.0 - c;
  r.m = {t * a.x * a.x + c,       t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y,
         t * a.x * a.y + s * a.z, t * a.y * a.y + c,       t * a.y * a.z - s * a.x,
         t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c};
  return r;
}

namespace {

// K [R|t] with K = [[f,0,cx],[0,f,cy],[0,0,1]].
Mat34 compose(double focal_px, const Vec2& principal, const Mat33& r,
              const Vec3& t) {
  Mat34 p;
  for (int col = 0; col < 3; ++col) {
    p(0, col) = focal_px * r(0, col) + principal.x * r(2, col);
    p(1, col) = focal_px * r(1, col) + principal.y * r(2, col);
    p(2, col) = r(2, col);
  }
  p(0, 3) = focal_px * t.x + principal.x * t.z;
  p(1, 3) = focal_px * t.y + principal.y * t.z;
  p(2, 3) = t.z;
  return p;
}

}  // namespace

Camera make_camera(double focal_px, const Vec2& principal,
                   const Vec3& axis_angle, const Vec3& translation, int width,
                   int height) {
  const Mat33 r = axis_angle_rotation(axis_angle);
  return make_camera(compose(focal_px, principal, r, translation), width, height);
}

Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                      double focal_px, int width, int height) {
  const Vec3 fwd = (target - eye).normalized();
  Vec3 upv = up;
  if (std::abs(fwd.dot(up.normalized())) > 1.0 - 1e-9) upv = Vec3{1, 0, 0};
  const Vec3 right = fwd.cross(upv).normalized();
  const Vec3 down = fwd.cross(right);  // y grows downward in the image

  Mat33 r;
  r.m = {right.x, right.y, right.z, down.x, down.y, down.z, fwd.x, fwd.y, fwd.z};
  const Vec3 t = -r.apply(eye);
  const Vec2 principal{(width - 1) / 2.0, (height - 1) / 2.0};
  return make_camera(compose(focal_px, principal, r, t), width, height);
}

Projection project(const Camera& cam, const Vec3& n) {
  const Vec3 h = cam.matrix.apply_homogeneous(n);
  Projection out;
  if (h.z <= kMinDepth) return out;
  out.p = {h.x / h.z, h.y / h.z};
  out.valid = true;
  return out;
}

Mat23 project_jacobian(const Camera& cam, const Vec3& n) {
  const Vec3 h = cam.matrix.apply_homogeneous(n);
  if (h.z <= kMinDepth)
    throw InvalidProjectionError("project_jacobian: point at or behind camera");
  const auto& m = cam.matrix;
  Mat23 j;
  const double inv_z2 = 1.0 / (h.z * h.z);
  for (int c = 0; c < 3; ++c) {
    j(0, c) = (m(0, c) * h.z - h.x * m(2, c)) * inv_z2;
    j(1, c) = (m(1, c) * h.z - h.y * m(2, c)) * inv_z2;
  }
  return j;
}

Vec3 camera_center(const Camera& cam) {
  const Mat33 inv = cam.matrix.linear_part().inverse();
  return -inv.apply(cam.matrix.translation_part());
}

Vec3 pixel_ray_direction(const Camera& cam, const Vec2& pixel) {
  const Mat33 inv = cam.matrix.linear_part().inverse();
  return inv.apply(Vec3{pixel.x, pixel.y, 1.0});
}

std::vector<Camera> load_cameras_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (!j.is_array()) throw IoError(path + ": expected a JSON array");
  std::vector<Camera> cams;
  for (const auto& e : j) {
    const auto& mm = e.at("matrix");
    if (!mm.is_array() || mm.size() != 12)
      throw IoError(path + ": camera matrix must have 12 numbers");
    Mat34 m;
    for (int i = 0; i < 12; ++i) m.m[i] = mm[i].get<double>();
    cams.push_back(make_camera(m, e.at("width").get<int>(), e.at("height").get<int>()));
  }
  return cams;
}

void save_cameras_json(const std::vector<Camera>& cams, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : cams) {
    nlohmann::json e;
    e["matrix"] = c.matrix.m;
    e["width"] = c.image_width;
    e["height"] = c.image_height;
    j.push_back(e);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace drwr
