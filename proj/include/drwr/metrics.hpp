#pragma once

#include <optional>
#include <span>
#include <string>

#include "drwr/loss.hpp"
#include "drwr/pointcloud.hpp"

#include <json.hpp>

namespace drwr {

/// Symmetric Chamfer distance. With squared = true (default) this is the
/// mean squared nearest-neighbor distance in both directions; with false,
/// the mean unsquared distance. Exact nearest neighbors via a kd-tree.
double chamfer(const PointCloud& a, const PointCloud& b, bool squared = true);

/// O(n^2) reference; the kd-tree path must match it exactly.
double chamfer_bruteforce(const PointCloud& a, const PointCloud& b,
                          bool squared = true);

/// Uniform scale about the bounding-box center so the box diagonal is 1.
/// Throws DegenerateBoxError when all points coincide.
PointCloud scale_unit_diagonal(const PointCloud& cloud);

/// Occupancy IoU after jointly mapping both clouds into the unit cube
/// (uniform scale about the combined bounding-box center, longest axis = 1).
double voxel_iou(const PointCloud& a, const PointCloud& b, int grid);

/// Mean nearest-neighbor pixel distance of in-foreground projections,
/// divided by the image width and averaged over views. Views with fewer than
/// two in-foreground projections contribute nothing.
double projection_uniformity(const PointCloud& cloud, std::span<const View> views);

/// Fraction of projections with indicator weight >= 0.5, averaged over views.
double foreground_fraction(const PointCloud& cloud, std::span<const View> views);

struct MetricsReport {
  double chamfer_x100 = 0.0;
  std::optional<double> iou_x100;
  double fg_fraction = 0.0;
  double uniformity = 0.0;
};

nlohmann::json metrics_report_to_json(const MetricsReport& report);

}  // namespace drwr
