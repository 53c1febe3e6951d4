#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace drwr {

/// Dense W x H grid, row-major. Pixel (x, y) has its center at the
/// continuous position (x, y); the continuous domain is [0,W-1] x [0,H-1].
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * height, fill) {
    assert(width > 0 && height > 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }

  T& operator()(int x, int y) {
    assert(in_bounds(x, y));
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  T operator()(int x, int y) const {
    assert(in_bounds(x, y));
    return data_[static_cast<size_t>(y) * width_ + x];
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  /// Value at (x, y), or `outside` when out of bounds.
  T at_or(int x, int y, T outside) const {
    return in_bounds(x, y) ? (*this)(x, y) : outside;
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Grid& o) const {
    return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using MaskGrid = Grid<uint8_t>;
using FieldGrid = Grid<double>;

}  // namespace drwr
