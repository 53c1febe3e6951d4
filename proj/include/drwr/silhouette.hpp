#pragma once

#include "drwr/errors.hpp"
#include "drwr/grid.hpp"
#include "drwr/vec.hpp"

namespace drwr {

/// Binary silhouette mask. Foreground pixels are 1, background 0.
class SilhouetteImage {
 public:
  SilhouetteImage(int width, int height)
      : mask_(width, height, uint8_t{0}) {
    if (width < 2 || height < 2)
      throw std::invalid_argument("silhouette must be at least 2x2");
  }
  explicit SilhouetteImage(MaskGrid mask);

  int width() const { return mask_.width(); }
  int height() const { return mask_.height(); }

  uint8_t operator()(int x, int y) const { return mask_(x, y); }
  void set(int x, int y, bool foreground) {
    mask_(x, y) = foreground ? 1 : 0;
  }

  const MaskGrid& mask() const { return mask_; }
  bool operator==(const SilhouetteImage& o) const { return mask_ == o.mask_; }

  int foreground_count() const;

 private:
  MaskGrid mask_;
};

/// Silhouette with the background replaced by a normalized negative distance
/// field: 1 on the foreground, values falling from 1 to 0 with distance to
/// the boundary in the background.
struct SmoothSilhouette {
  FieldGrid field;
  SilhouetteImage source;

  int width() const { return field.width(); }
  int height() const { return field.height(); }
};

/// Foreground pixels that have at least one background 4-neighbor.
MaskGrid boundary_pixels(const SilhouetteImage& img);

/// Exact Euclidean distance (in pixels) from each background pixel to the
/// nearest boundary pixel; 0 on all foreground pixels.
/// Throws AllBackgroundError when the image has no foreground.
FieldGrid distance_transform(const SilhouetteImage& img);

/// Serial reference implementation of the same two-pass transform; output is
/// bit-identical to distance_transform at any thread count.
FieldGrid distance_transform_serial(const SilhouetteImage& img);

/// Builds the smooth silhouette field: foreground stays 1, background becomes
/// minmax-normalized (1 - d/W). Degenerate cases: empty background gives all
/// ones; a single distinct background distance gives background 0.
SmoothSilhouette smooth(const SilhouetteImage& img);

struct FieldSample {
  double value = 0.0;
  Vec2 grad;
};

/// Bilinear sample of a real field at a continuous position, with the exact
/// gradient of the bilinear patch. Out-of-bounds positions are extended as
/// value(clamp(p)) - |p - clamp(p)| / W so the gradient keeps pointing back
/// toward the image.
FieldSample sample_field(const FieldGrid& field, const Vec2& p);

/// Bilinear sample of a binary mask with zero padding: positions more than
/// one pixel outside the image give value 0 and zero gradient.
FieldSample sample_mask(const SilhouetteImage& img, const Vec2& p);

}  // namespace drwr
