#pragma once

#include <string>
#include <vector>

#include "drwr/errors.hpp"
#include "drwr/vec.hpp"

namespace drwr {

/// Composed 3x4 projection matrix (intrinsics * extrinsics) plus the image
/// size it projects into. Pixel centers sit at integer coordinates; the
/// continuous image domain is [0, W-1] x [0, H-1].
struct Camera {
  Mat34 matrix;
  int image_width = 0;
  int image_height = 0;
};

struct Projection {
  Vec2 p;
  bool valid = false;  // false when the point is at or behind the camera
};

inline constexpr double kMinDepth = 1e-6;

/// Validates the 3x3 linear part and returns the camera.
Camera make_camera(const Mat34& matrix, int width, int height);

/// Builds intrinsics * [R|t] from focal length (pixels), principal point,
/// axis-angle rotation and translation.
Camera make_camera(double focal_px, const Vec2& principal,
                   const Vec3& axis_angle, const Vec3& translation, int width,
                   int height);

/// Camera at `eye` looking at `target`, z forward, y down in the image.
Camera look_at_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                      double focal_px, int width, int height);

Mat33 axis_angle_rotation(const Vec3& axis_angle);

/// Perspective projection p = (h_x/h_z, h_y/h_z), h = T [n; 1].
Projection project(const Camera& cam, const Vec3& n);

/// Exact 2x3 derivative of the projection. Throws InvalidProjectionError
/// when the point is at or behind the camera plane.
Mat23 project_jacobian(const Camera& cam, const Vec3& n);

/// Center of projection and the ray direction through a pixel position.
Vec3 camera_center(const Camera& cam);
Vec3 pixel_ray_direction(const Camera& cam, const Vec2& pixel);

/// Camera rig JSON: array of {"matrix": [12 numbers row-major],
/// "width": int, "height": int}.
std::vector<Camera> load_cameras_json(const std::string& path);
void save_cameras_json(const std::vector<Camera>& cams, const std::string& path);

}  // namespace drwr
