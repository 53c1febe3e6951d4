#include "drwr/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "drwr/runtime.hpp"

namespace drwr {

namespace {

double sqdist(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

// Left-balanced kd-tree over an index permutation; exact nearest neighbor.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& pts) : pts_(pts) {
    idx_.resize(pts.size());
    std::iota(idx_.begin(), idx_.end(), 0);
    build(0, static_cast<int>(pts.size()), 0);
  }

  double nearest_sqdist(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(q, 0, static_cast<int>(pts_.size()), 0, best);
    return best;
  }

 private:
  void build(int lo, int hi, int axis) {
    if (hi - lo <= 1) return;
    const int mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](int a, int b) { return coord(a, axis) < coord(b, axis); });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void search(const Vec3& q, int lo, int hi, int axis, double& best) const {
    if (hi <= lo) return;
    const int mid = (lo + hi) / 2;
    const double d = sqdist(q, pts_[idx_[mid]]);
    if (d < best) best = d;
    const double delta = qcoord(q, axis) - coord(idx_[mid], axis);
    const int next = (axis + 1) % 3;
    if (delta < 0) {
      search(q, lo, mid, next, best);
      if (delta * delta < best) search(q, mid + 1, hi, next, best);
    } else {
      search(q, mid + 1, hi, next, best);
      if (delta * delta < best) search(q, lo, mid, next, best);
    }
  }

  double coord(int i, int axis) const {
    const Vec3& p = pts_[i];
    return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
  }
  static double qcoord(const Vec3& p, int axis) {
    return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
  }

  const std::vector<Vec3>& pts_;
  std::vector<int> idx_;
};

double directed_mean(const std::vector<Vec3>& from, const KdTree& tree,
                     bool squared) {
  const int n = static_cast<int>(from.size());
  std::vector<double> d(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int i = 0; i < n; ++i) {
    const double sq = tree.nearest_sqdist(from[i]);
    d[i] = squared ? sq : std::sqrt(sq);
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += d[i];  // fixed-order reduction
  return sum / n;
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b, bool squared) {
  if (a.empty() || b.empty()) throw EmptyCloudError("chamfer: empty cloud");
  const KdTree ta(a.points);
  const KdTree tb(b.points);
  return directed_mean(a.points, tb, squared) + directed_mean(b.points, ta, squared);
}

double chamfer_bruteforce(const PointCloud& a, const PointCloud& b, bool squared) {
  if (a.empty() || b.empty()) throw EmptyCloudError("chamfer: empty cloud");
  const auto directed = [&](const std::vector<Vec3>& from,
                            const std::vector<Vec3>& to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, sqdist(p, q));
      sum += squared ? best : std::sqrt(best);
    }
    return sum / from.size();
  };
  return directed(a.points, b.points) + directed(b.points, a.points);
}

PointCloud scale_unit_diagonal(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloudError("scale_unit_diagonal: empty cloud");
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& p : cloud.points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3 d = hi - lo;
  const double diag = d.norm();
  if (diag <= 0.0)
    throw DegenerateBoxError("scale_unit_diagonal: all points coincide");
  const Vec3 center = (lo + hi) * 0.5;
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points)
    out.points.push_back(center + (p - center) * (1.0 / diag));
  return out;
}

double voxel_iou(const PointCloud& a, const PointCloud& b, int grid) {
  if (grid < 2) throw std::invalid_argument("voxel grid must be >= 2");
  if (a.empty() || b.empty()) throw EmptyCloudError("voxel_iou: empty cloud");

  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  const auto extend = [&](const PointCloud& c) {
    for (const auto& p : c.points) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
  };
  extend(a);
  extend(b);
  const Vec3 d = hi - lo;
  const double extent = std::max({d.x, d.y, d.z, 1e-300});
  const Vec3 center = (lo + hi) * 0.5;

  const auto voxelize = [&](const PointCloud& c) {
    std::vector<uint8_t> occ(static_cast<size_t>(grid) * grid * grid, 0);
    for (const auto& p : c.points) {
      const Vec3 u = (p - center) * (1.0 / extent) + Vec3{0.5, 0.5, 0.5};
      const auto bin = [&](double v) {
        return std::clamp(static_cast<int>(std::floor(v * grid)), 0, grid - 1);
      };
      occ[(static_cast<size_t>(bin(u.z)) * grid + bin(u.y)) * grid + bin(u.x)] = 1;
    }
    return occ;
  };

  const auto oa = voxelize(a);
  const auto ob = voxelize(b);
  long inter = 0, uni = 0;
  for (size_t i = 0; i < oa.size(); ++i) {
    inter += oa[i] & ob[i];
    uni += oa[i] | ob[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

double projection_uniformity(const PointCloud& cloud, std::span<const View> views) {
  if (views.empty()) throw EmptyViewsError("projection_uniformity: no views");
  if (cloud.empty()) throw EmptyCloudError("projection_uniformity: empty cloud");
  double sum = 0.0;
  int counted_views = 0;
  for (const auto& view : views) {
    std::vector<Vec2> fg;
    for (const auto& n : cloud.points) {
      const Projection pr = project(view.camera, n);
      if (pr.valid && indicator_weight(view.mask(), pr.p) >= 0.5)
        fg.push_back(pr.p);
    }
    if (fg.size() < 2) continue;
    double mean_nn = 0.0;
    for (size_t i = 0; i < fg.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < fg.size(); ++j) {
        if (i == j) continue;
        best = std::min(best, (fg[i] - fg[j]).norm());
      }
      mean_nn += best;
    }
    mean_nn /= fg.size();
    sum += mean_nn / view.mask().width();
    ++counted_views;
  }
  return counted_views == 0 ? 0.0 : sum / counted_views;
}

double foreground_fraction(const PointCloud& cloud, std::span<const View> views) {
  if (views.empty()) throw EmptyViewsError("foreground_fraction: no views");
  if (cloud.empty()) throw EmptyCloudError("foreground_fraction: empty cloud");
  double sum = 0.0;
  for (const auto& view : views) {
    int count = 0;
    for (const auto& n : cloud.points) {
      const Projection pr = project(view.camera, n);
      if (pr.valid && indicator_weight(view.mask(), pr.p) >= 0.5) ++count;
    }
    sum += static_cast<double>(count) / cloud.size();
  }
  return sum / views.size();
}

nlohmann::json metrics_report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["chamfer_x100"] = report.chamfer_x100;
  if (report.iou_x100)
    j["iou_x100"] = *report.iou_x100;
  else
    j["iou_x100"] = nullptr;
  j["fg_fraction"] = report.fg_fraction;
  j["uniformity"] = report.uniformity;
  return j;
}

}  // namespace drwr
