#pragma once

#include <string>

#include "drwr/grid.hpp"
#include "drwr/silhouette.hpp"

namespace drwr {

/// Loads a binary mask from an 8-bit grayscale PGM (P2/P5) or PNG file.
/// Pixels with value >= 128 become foreground.
SilhouetteImage load_mask(const std::string& path);

/// Writes a mask as binary PGM (P5, maxval 255, foreground = 255).
void save_mask_pgm(const SilhouetteImage& img, const std::string& path);

/// Writes a mask as an 8-bit grayscale PNG.
void save_mask_png(const SilhouetteImage& img, const std::string& path);

/// Writes a smooth field as 16-bit PGM, value = round(field * 65535).
void save_field_pgm16(const FieldGrid& field, const std::string& path);

/// Raw little-endian float32 grid with a 16-byte header:
/// magic "DRWRSMTH", u32 width, u32 height.
void save_field_raw(const FieldGrid& field, const std::string& path);
FieldGrid load_field_raw(const std::string& path);

}  // namespace drwr
