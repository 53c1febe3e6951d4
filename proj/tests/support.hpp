#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "drwr/rng.hpp"
#include "drwr/silhouette.hpp"

namespace drwr::testing {

/// O(N^2) nearest-boundary-pixel search; the independent oracle for the
/// two-pass distance transform.
inline FieldGrid bruteforce_distance_transform(const SilhouetteImage& img) {
  const int w = img.width();
  const int h = img.height();
  const MaskGrid boundary = boundary_pixels(img);
  std::vector<std::pair<int, int>> bpix;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (boundary(x, y)) bpix.emplace_back(x, y);

  FieldGrid d(w, h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (img(x, y)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [bx, by] : bpix) {
        const double dx = x - bx;
        const double dy = y - by;
        best = std::min(best, dx * dx + dy * dy);
      }
      d(x, y) = std::sqrt(best);
    }
  return d;
}

/// Random blobby mask: union of a few random disks, guaranteed non-empty.
inline SilhouetteImage random_mask(int w, int h, Rng& rng, int disks = 3) {
  MaskGrid m(w, h, uint8_t{0});
  for (int k = 0; k < disks; ++k) {
    const double cx = rng.uniform(0.2 * w, 0.8 * w);
    const double cy = rng.uniform(0.2 * h, 0.8 * h);
    const double r = rng.uniform(0.08 * w, 0.25 * w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dx = x - cx;
        const double dy = y - cy;
        if (dx * dx + dy * dy <= r * r) m(x, y) = 1;
      }
  }
  // Keep at least one foreground pixel.
  m(w / 2, h / 2) = 1;
  return SilhouetteImage(std::move(m));
}

inline SilhouetteImage disk_mask(int w, int h, double cx, double cy, double r) {
  MaskGrid m(w, h, uint8_t{0});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      if (dx * dx + dy * dy <= r * r) m(x, y) = 1;
    }
  return SilhouetteImage(std::move(m));
}

inline double rel_err(double got, double want, double floor = 1e-12) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace drwr::testing
