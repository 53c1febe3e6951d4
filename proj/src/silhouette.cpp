#include "drwr/silhouette.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "drwr/runtime.hpp"

namespace drwr {

namespace {

constexpr double kInf = 1e20;

// 1D squared-distance transform over the lower envelope of parabolas
// (Felzenszwalb & Huttenlocher). Exact for integer-valued seeds.
void edt_1d(const double* f, double* d, int n, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

template <bool Parallel>
FieldGrid distance_transform_impl(const SilhouetteImage& img) {
  const int w = img.width();
  const int h = img.height();
  if (img.foreground_count() == 0)
    throw AllBackgroundError("distance_transform: image has no foreground");

  const MaskGrid boundary = boundary_pixels(img);

  // Column pass: squared vertical distance to the nearest boundary pixel.
  FieldGrid colsq(w, h, kInf);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (Parallel)
  for (int x = 0; x < w; ++x) {
    std::vector<double> f(h), d(h), z(h + 1);
    std::vector<int> v(h);
    for (int y = 0; y < h; ++y) f[y] = boundary(x, y) ? 0.0 : kInf;
    edt_1d(f.data(), d.data(), h, v.data(), z.data());
    for (int y = 0; y < h; ++y) colsq(x, y) = d[y];
  }

  // Row pass over the column result gives the full 2D squared distance.
  FieldGrid dist(w, h, 0.0);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (Parallel)
  for (int y = 0; y < h; ++y) {
    std::vector<double> f(w), d(w), z(w + 1);
    std::vector<int> v(w);
    for (int x = 0; x < w; ++x) f[x] = colsq(x, y);
    edt_1d(f.data(), d.data(), w, v.data(), z.data());
    for (int x = 0; x < w; ++x)
      dist(x, y) = img(x, y) ? 0.0 : std::sqrt(d[x]);
  }
  return dist;
}

}  // namespace

SilhouetteImage::SilhouetteImage(MaskGrid mask) : mask_(std::move(mask)) {
  if (mask_.width() < 2 || mask_.height() < 2)
    throw std::invalid_argument("silhouette must be at least 2x2");
  for (uint8_t v : mask_.data())
    if (v > 1) throw std::invalid_argument("silhouette cells must be 0 or 1");
}

int SilhouetteImage::foreground_count() const {
  int n = 0;
  for (uint8_t v : mask_.data()) n += v;
  return n;
}

MaskGrid boundary_pixels(const SilhouetteImage& img) {
  const int w = img.width();
  const int h = img.height();
  MaskGrid b(w, h, uint8_t{0});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!img(x, y)) continue;
      const bool edge = (x > 0 && !img(x - 1, y)) || (x + 1 < w && !img(x + 1, y)) ||
                        (y > 0 && !img(x, y - 1)) || (y + 1 < h && !img(x, y + 1));
      if (edge) b(x, y) = 1;
    }
  return b;
}

FieldGrid distance_transform(const SilhouetteImage& img) {
  return distance_transform_impl<true>(img);
}

FieldGrid distance_transform_serial(const SilhouetteImage& img) {
  return distance_transform_impl<false>(img);
}

SmoothSilhouette smooth(const SilhouetteImage& img) {
  const int w = img.width();
  const int h = img.height();
  const FieldGrid dist = distance_transform(img);

  FieldGrid field(w, h, 1.0);
  // Background values 1 - d/W, then minmax over the background only.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool any_bg = false;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (img(x, y)) continue;
      any_bg = true;
      const double v = 1.0 - dist(x, y) / w;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }

  if (any_bg) {
    const double range = hi - lo;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (img(x, y)) continue;
        const double v = 1.0 - dist(x, y) / w;
        field(x, y) = range > 0.0 ? (v - lo) / range : 0.0;
      }
  }
  return SmoothSilhouette{std::move(field), img};
}

FieldSample sample_field(const FieldGrid& field, const Vec2& p) {
  const int w = field.width();
  const int h = field.height();
  const double cx = std::clamp(p.x, 0.0, static_cast<double>(w - 1));
  const double cy = std::clamp(p.y, 0.0, static_cast<double>(h - 1));

  // Cell of floor(p), pulled one cell in on the far edges so all four
  // corners exist.
  const int x0 = std::min(static_cast<int>(std::floor(cx)), w - 2);
  const int y0 = std::min(static_cast<int>(std::floor(cy)), h - 2);
  const double fx = cx - x0;
  const double fy = cy - y0;

  const double v00 = field(x0, y0);
  const double v10 = field(x0 + 1, y0);
  const double v01 = field(x0, y0 + 1);
  const double v11 = field(x0 + 1, y0 + 1);

  FieldSample s;
  s.value = (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
            (1 - fx) * fy * v01 + fx * fy * v11;
  s.grad.x = (1 - fy) * (v10 - v00) + fy * (v11 - v01);
  s.grad.y = (1 - fx) * (v01 - v00) + fx * (v11 - v10);

  const double dx = p.x - cx;
  const double dy = p.y - cy;
  if (dx != 0.0 || dy != 0.0) {
    // Linear extension outside the image: keeps a gradient pointing back in.
    const double dist = std::sqrt(dx * dx + dy * dy);
    s.value -= dist / w;
    if (dx != 0.0) s.grad.x = -dx / (dist * w);
    if (dy != 0.0) s.grad.y = -dy / (dist * w);
  }
  return s;
}

FieldSample sample_mask(const SilhouetteImage& img, const Vec2& p) {
  const int x0 = static_cast<int>(std::floor(p.x));
  const int y0 = static_cast<int>(std::floor(p.y));
  const double fx = p.x - x0;
  const double fy = p.y - y0;

  const auto& m = img.mask();
  const double v00 = m.at_or(x0, y0, 0);
  const double v10 = m.at_or(x0 + 1, y0, 0);
  const double v01 = m.at_or(x0, y0 + 1, 0);
  const double v11 = m.at_or(x0 + 1, y0 + 1, 0);

  FieldSample s;
  s.value = (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
            (1 - fx) * fy * v01 + fx * fy * v11;
  s.grad.x = (1 - fy) * (v10 - v00) + fy * (v11 - v01);
  s.grad.y = (1 - fx) * (v01 - v00) + fx * (v11 - v10);
  return s;
}

}  // namespace drwr
