#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drwr/silhouette.hpp"
#include "support.hpp"

using namespace drwr;
using namespace drwr::testing;

namespace {

SilhouetteImage full_foreground(int w, int h) {
  MaskGrid m(w, h, uint8_t{1});
  return SilhouetteImage(std::move(m));
}

}  // namespace

TEST_CASE("distance transform on an all-foreground image is all zeros") {
  const auto img = full_foreground(5, 4);
  const FieldGrid d = distance_transform(img);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) CHECK(d(x, y) == 0.0);
}

TEST_CASE("background pixel adjacent to the boundary has distance one") {
  SilhouetteImage img(4, 4);
  img.set(1, 1, true);
  const FieldGrid d = distance_transform(img);
  CHECK(d(2, 1) == 1.0);
  CHECK(d(1, 2) == 1.0);
  CHECK(d(0, 1) == 1.0);
}

TEST_CASE("9x9 single foreground pixel, corner distance is sqrt(32)") {
  SilhouetteImage img(9, 9);
  img.set(4, 4, true);
  const FieldGrid d = distance_transform(img);
  CHECK(d(0, 0) == doctest::Approx(std::sqrt(32.0)).epsilon(1e-12));
  // Against the brute-force oracle, exactly.
  const FieldGrid ref = bruteforce_distance_transform(img);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) CHECK(d(x, y) == ref(x, y));
}

TEST_CASE("distance transform equals brute force exactly on random masks") {
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 2 + static_cast<int>(rng.below(63));
    const int h = 2 + static_cast<int>(rng.below(63));
    const SilhouetteImage img = random_mask(w, h, rng);
    const FieldGrid got = distance_transform(img);
    const FieldGrid ref = bruteforce_distance_transform(img);
    REQUIRE(got == ref);
  }
}

TEST_CASE("parallel and serial transforms are bit-identical") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const SilhouetteImage img = random_mask(48, 36, rng);
    REQUIRE(distance_transform(img) == distance_transform_serial(img));
  }
}

TEST_CASE("distance transform requires foreground") {
  SilhouetteImage img(4, 4);
  CHECK_THROWS_AS(distance_transform(img), AllBackgroundError);
  CHECK_THROWS_AS(smooth(img), AllBackgroundError);
}

TEST_CASE("smooth: all-foreground image gives a field of ones") {
  const auto s = smooth(full_foreground(4, 4));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) CHECK(s.field(x, y) == 1.0);
}

TEST_CASE("smooth: foreground pixels are exactly one, background in [0,1]") {
  Rng rng(3);
  const SilhouetteImage img = random_mask(32, 32, rng);
  const auto s = smooth(img);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      if (img(x, y)) {
        CHECK(s.field(x, y) == 1.0);
      } else {
        CHECK(s.field(x, y) >= 0.0);
        CHECK(s.field(x, y) <= 1.0);
      }
    }
}

TEST_CASE("smooth: [fg, bg, bg] row pattern normalizes to 1 and 0") {
  // 3x2 image, both rows [fg, bg, bg]: background distances 1 and 2 pixels.
  SilhouetteImage img(3, 2);
  img.set(0, 0, true);
  img.set(0, 1, true);
  const auto s = smooth(img);
  for (int y = 0; y < 2; ++y) {
    CHECK(s.field(0, y) == 1.0);
    CHECK(s.field(1, y) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.field(2, y) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("smooth: minmax hits both bounds on nontrivial backgrounds") {
  Rng rng(5);
  const SilhouetteImage img = random_mask(24, 24, rng, 1);
  const auto s = smooth(img);
  double lo = 2.0, hi = -1.0;
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x)
      if (!img(x, y)) {
        lo = std::min(lo, s.field(x, y));
        hi = std::max(hi, s.field(x, y));
      }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
}

TEST_CASE("smooth: single distinct background distance degenerates to zero") {
  // Foreground everywhere except one corner: the lone background pixel has a
  // single distance value.
  MaskGrid m(3, 3, uint8_t{1});
  m(2, 2) = 0;
  const auto s = smooth(SilhouetteImage(std::move(m)));
  CHECK(s.field(2, 2) == 0.0);
  CHECK(s.field(0, 0) == 1.0);
}

TEST_CASE("smooth: background values decrease with distance") {
  const SilhouetteImage img = disk_mask(33, 33, 16, 16, 6);
  const auto s = smooth(img);
  const FieldGrid d = distance_transform(img);
  // Along the central row, moving right from the disk.
  for (int x = 23; x < 32; ++x) {
    CHECK(d(x + 1, 16) > d(x, 16));
    CHECK(s.field(x + 1, 16) < s.field(x, 16));
  }
}

TEST_CASE("smooth is deterministic") {
  Rng rng(9);
  const SilhouetteImage img = random_mask(40, 28, rng);
  const auto a = smooth(img);
  const auto b = smooth(img);
  REQUIRE(a.field == b.field);
}

TEST_CASE("sample_field: constant field of ones") {
  FieldGrid f(4, 4, 1.0);
  const auto s = sample_field(f, {1.7, 2.2});
  CHECK(s.value == doctest::Approx(1.0));
  CHECK(s.grad.x == doctest::Approx(0.0));
  CHECK(s.grad.y == doctest::Approx(0.0));
}

TEST_CASE("sample_field: 2x2 ramp in y") {
  FieldGrid f(2, 2, 0.0);
  f(0, 1) = 1.0;
  f(1, 1) = 1.0;
  const auto s = sample_field(f, {0.5, 0.5});
  CHECK(s.value == doctest::Approx(0.5));
  CHECK(s.grad.x == doctest::Approx(0.0));
  CHECK(s.grad.y == doctest::Approx(1.0));
}

TEST_CASE("sample_field gradient matches central finite differences") {
  Rng rng(21);
  FieldGrid f(8, 8, 0.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) f(x, y) = rng.uniform();

  const double h = 1e-4;
  for (int trial = 0; trial < 200; ++trial) {
    // Interior positions away from cell boundaries.
    const Vec2 p{rng.uniform(0.1, 6.9), rng.uniform(0.1, 6.9)};
    if (std::abs(p.x - std::round(p.x)) < 2 * h) continue;
    if (std::abs(p.y - std::round(p.y)) < 2 * h) continue;
    const auto s = sample_field(f, p);
    const double fdx =
        (sample_field(f, {p.x + h, p.y}).value - sample_field(f, {p.x - h, p.y}).value) /
        (2 * h);
    const double fdy =
        (sample_field(f, {p.x, p.y + h}).value - sample_field(f, {p.x, p.y - h}).value) /
        (2 * h);
    CHECK(rel_err(s.grad.x, fdx, 1e-9) < 1e-6);
    CHECK(rel_err(s.grad.y, fdy, 1e-9) < 1e-6);
  }
}

TEST_CASE("sample_field is continuous across cell boundaries") {
  Rng rng(13);
  FieldGrid f(6, 6, 0.0);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) f(x, y) = rng.uniform();
  const double eps = 1e-9;
  for (int trial = 0; trial < 50; ++trial) {
    const double y = rng.uniform(0.2, 4.8);
    const int xb = 1 + static_cast<int>(rng.below(4));
    const double a = sample_field(f, {xb - eps, y}).value;
    const double b = sample_field(f, {xb + eps, y}).value;
    CHECK(std::abs(a - b) < 1e-7);
  }
}

TEST_CASE("sample_field out of bounds extends with a distance penalty") {
  FieldGrid f(4, 4, 0.7);
  // Clamped value minus distance / W.
  const auto s = sample_field(f, {-2.0, 1.5});
  CHECK(s.value == doctest::Approx(0.7 - 2.0 / 4));
  // Gradient points back toward the image: value increases with x.
  CHECK(s.grad.x > 0.0);
  const auto corner = sample_field(f, {5.0, 5.0});
  const double dist = std::sqrt(2.0 * 4.0);
  CHECK(corner.value == doctest::Approx(0.7 - dist / 4));
  CHECK(corner.grad.x < 0.0);
  CHECK(corner.grad.y < 0.0);
}

TEST_CASE("sample_mask: zero outside with zero gradient far away") {
  SilhouetteImage img(4, 4);
  img.set(1, 1, true);
  const auto far = sample_mask(img, {10.0, 10.0});
  CHECK(far.value == 0.0);
  CHECK(far.grad.x == 0.0);
  CHECK(far.grad.y == 0.0);
}

TEST_CASE("sample_mask interpolates an edge") {
  SilhouetteImage img(2, 2);
  img.set(0, 0, true);
  img.set(0, 1, true);
  // Midway across the vertical foreground/background edge.
  const auto s = sample_mask(img, {0.5, 0.5});
  CHECK(s.value == doctest::Approx(0.5));
  CHECK(s.grad.x == doctest::Approx(-1.0));
}
