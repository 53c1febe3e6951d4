#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drwr/loss.hpp"
#include "drwr/runtime.hpp"
#include "support.hpp"

using namespace drwr;
using namespace drwr::testing;

namespace {

SilhouetteImage full_foreground(int w, int h) {
  MaskGrid m(w, h, uint8_t{1});
  return SilhouetteImage(std::move(m));
}

// Vertical foreground/background edge: foreground for x <= last_fg_col.
SilhouetteImage half_plane(int w, int h, int last_fg_col) {
  MaskGrid m(w, h, uint8_t{0});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x <= last_fg_col; ++x) m(x, y) = 1;
  return SilhouetteImage(std::move(m));
}

double pairwise_total(const SilhouetteImage& v, const std::vector<Vec2>& proj,
                      const LossConfig& cfg) {
  const auto r = pairwise_serial(v, proj, cfg);
  return std::accumulate(r.l2.begin(), r.l2.end(), 0.0);
}

}  // namespace

TEST_CASE("unary_smooth is zero with zero gradient deep inside foreground") {
  const auto vg = smooth(disk_mask(32, 32, 16, 16, 10));
  const auto s = unary_smooth(vg, {16.3, 15.6});
  CHECK(s.value == 0.0);
  CHECK(s.grad.x == 0.0);
  CHECK(s.grad.y == 0.0);
}

TEST_CASE("unary_smooth on the [fg,bg,bg] field at the last midpoint is 0.5") {
  SilhouetteImage img(3, 2);
  img.set(0, 0, true);
  img.set(0, 1, true);
  const auto vg = smooth(img);  // field rows are [1, 1, 0]
  const auto s = unary_smooth(vg, {1.5, 0.5});
  CHECK(s.value == doctest::Approx(0.5));
}

TEST_CASE("unary_smooth gradient matches finite differences") {
  Rng rng(19);
  const auto vg = smooth(random_mask(32, 32, rng));
  const double h = 1e-6;
  int done = 0;
  while (done < 100) {
    // Positions inside and outside the frame, off cell boundaries.
    const Vec2 p{rng.uniform(-4.0, 35.0), rng.uniform(-4.0, 35.0)};
    if (std::abs(p.x - std::round(p.x)) < 1e-3) continue;
    if (std::abs(p.y - std::round(p.y)) < 1e-3) continue;
    const auto s = unary_smooth(vg, p);
    const double fx = (unary_smooth(vg, {p.x + h, p.y}).value -
                       unary_smooth(vg, {p.x - h, p.y}).value) /
                      (2 * h);
    const double fy = (unary_smooth(vg, {p.x, p.y + h}).value -
                       unary_smooth(vg, {p.x, p.y - h}).value) /
                      (2 * h);
    CHECK(std::abs(s.grad.x - fx) < 1e-6 * std::max(1.0, std::abs(fx)));
    CHECK(std::abs(s.grad.y - fy) < 1e-6 * std::max(1.0, std::abs(fy)));
    ++done;
  }
}

TEST_CASE("unary_binary: constant patches give the local-minimum plateau") {
  const auto img = disk_mask(32, 32, 16, 16, 6);
  // Four background pixels around (2.5, 2.5).
  auto s = unary_binary(img, {2.5, 2.5});
  CHECK(s.value == 1.0);
  CHECK(s.grad.x == 0.0);
  CHECK(s.grad.y == 0.0);
  // Four foreground pixels near the center.
  s = unary_binary(img, {16.5, 16.5});
  CHECK(s.value == 0.0);
  CHECK(s.grad.x == 0.0);
  CHECK(s.grad.y == 0.0);
}

TEST_CASE("unary_binary straddling a vertical edge is linear in x") {
  const auto img = half_plane(8, 8, 3);  // edge between x=3 and x=4
  for (double fx : {0.25, 0.5, 0.75}) {
    const auto s = unary_binary(img, {3.0 + fx, 4.5});
    CHECK(s.value == doctest::Approx(fx));
    CHECK(s.grad.x == doctest::Approx(1.0));
  }
}

TEST_CASE("indicator weight hits 1, 0 and the edge midpoint") {
  const auto img = half_plane(8, 8, 3);
  CHECK(indicator_weight(img, {1.5, 4.0}) == 1.0);
  CHECK(indicator_weight(img, {6.5, 4.0}) == 0.0);
  CHECK(indicator_weight(img, {3.5, 4.0}) == doctest::Approx(0.5));
  CHECK(indicator_weight(img, {-20.0, 4.0}) == 0.0);  // out of bounds
}

TEST_CASE("boundary bias is 1 at the center of a wide disk") {
  const auto img = disk_mask(32, 32, 16, 16, 9);  // radius > R+1
  CHECK(boundary_bias(img, {16.2, 15.7}, 5) == doctest::Approx(1.0));
}

TEST_CASE("boundary bias is 0 deep in the background") {
  const auto img = disk_mask(48, 48, 24, 24, 6);
  CHECK(boundary_bias(img, {40.5, 40.5}, 5) == doctest::Approx(0.0));
}

TEST_CASE("boundary bias two pixels inside a straight edge, R=5") {
  // Foreground x <= 9; p sits 2 pixels inside the edge line x = 9.5.
  const auto img = half_plane(16, 16, 9);
  const Vec2 p{7.5, 8.5};
  // Scales 1-2: corners at x=7 and 7+r <= 9, all foreground, b=1.
  // Scales 3-5: right corners at x=10,11,12 are background, so
  // b_r = 1 - (p.x - 7)/r.
  const double expect =
      (1.0 + 1.0 + (1.0 - 0.5 / 3) + (1.0 - 0.5 / 4) + (1.0 - 0.5 / 5)) / 5.0;
  CHECK(boundary_bias(img, p, 5) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("boundary bias decreases toward the edge at whole-pixel steps") {
  const auto img = half_plane(32, 16, 19);
  double prev = 2.0;
  for (double x = 2.5; x <= 18.5; x += 1.0) {
    const double b = boundary_bias(img, {x, 8.5}, 5);
    CHECK(b <= prev + 1e-12);
    prev = b;
  }
}

TEST_CASE("scaled-corners bias mode reduces to bilinear at scale 1") {
  const auto img = half_plane(16, 16, 9);
  for (double x : {7.3, 8.9, 9.4, 10.2}) {
    const auto a = boundary_bias_sample(img, {x, 8.5}, 1, BiasInterp::kStrideBilinear);
    const auto b = boundary_bias_sample(img, {x, 8.5}, 1, BiasInterp::kScaledCorners);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  }
}

TEST_CASE("scaled-corners bias gradient matches finite differences") {
  const auto img = half_plane(32, 32, 15);
  const double h = 1e-7;
  for (double x : {13.3, 14.35, 15.3, 16.25}) {
    const Vec2 p{x, 12.3};
    const auto s = boundary_bias_sample(img, p, 3, BiasInterp::kScaledCorners);
    const double fd = (boundary_bias_sample(img, {x + h, 12.3}, 3,
                                            BiasInterp::kScaledCorners)
                           .value -
                       boundary_bias_sample(img, {x - h, 12.3}, 3,
                                            BiasInterp::kScaledCorners)
                           .value) /
                      (2 * h);
    CHECK(std::abs(s.grad.x - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("pairwise: both projections deep in background contribute nothing") {
  const auto img = disk_mask(32, 32, 16, 16, 5);
  const std::vector<Vec2> proj{{2.5, 2.5}, {28.5, 3.5}};
  const auto r = pairwise_serial(img, proj, LossConfig{});
  CHECK(r.l2[0] == 0.0);
  CHECK(r.l2[1] == 0.0);
  CHECK(r.grad[0].norm() == 0.0);
  CHECK(r.grad[1].norm() == 0.0);
}

TEST_CASE("pairwise: coincident deep-foreground projections give e each") {
  const auto img = disk_mask(32, 32, 16, 16, 10);
  const std::vector<Vec2> proj{{16.25, 16.25}, {16.25, 16.25}};
  const auto r = pairwise_serial(img, proj, LossConfig{});
  CHECK(r.l2[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(r.l2[1] == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("pairwise gradients match finite differences in a uniform patch") {
  // Full-foreground mask keeps omega and delta locally constant, so the
  // detached gradient is the true gradient.
  const auto img = full_foreground(24, 24);
  Rng rng(29);
  LossConfig cfg;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec2> proj;
    for (int j = 0; j < 3; ++j)
      proj.push_back({rng.uniform(7.1, 16.9), rng.uniform(7.1, 16.9)});
    const auto r = pairwise_serial(img, proj, cfg);
    for (int j = 0; j < 3; ++j) {
      for (int axis = 0; axis < 2; ++axis) {
        auto plus = proj, minus = proj;
        (axis == 0 ? plus[j].x : plus[j].y) += h;
        (axis == 0 ? minus[j].x : minus[j].y) -= h;
        const double fd =
            (pairwise_total(img, plus, cfg) - pairwise_total(img, minus, cfg)) /
            (2 * h);
        const double got = axis == 0 ? r.grad[j].x : r.grad[j].y;
        CHECK(rel_err(got, fd, 1e-8) < 1e-5);
      }
    }
  }
}

TEST_CASE("pairwise gradients with attached weights match finite differences") {
  Rng rng(37);
  const auto img = disk_mask(32, 32, 16, 16, 8);
  LossConfig cfg;
  cfg.detach_weights = false;
  const double h = 1e-6;
  int done = 0;
  while (done < 15) {
    std::vector<Vec2> proj;
    bool margins_ok = true;
    for (int j = 0; j < 4; ++j) {
      const Vec2 p{rng.uniform(6.0, 26.0), rng.uniform(6.0, 26.0)};
      if (std::abs(p.x - std::round(p.x)) < 1e-3 ||
          std::abs(p.y - std::round(p.y)) < 1e-3)
        margins_ok = false;
      proj.push_back(p);
    }
    if (!margins_ok) continue;
    const auto r = pairwise_serial(img, proj, cfg);
    for (int j = 0; j < 4; ++j)
      for (int axis = 0; axis < 2; ++axis) {
        auto plus = proj, minus = proj;
        (axis == 0 ? plus[j].x : plus[j].y) += h;
        (axis == 0 ? minus[j].x : minus[j].y) -= h;
        const double fd =
            (pairwise_total(img, plus, cfg) - pairwise_total(img, minus, cfg)) /
            (2 * h);
        const double got = axis == 0 ? r.grad[j].x : r.grad[j].y;
        CHECK(std::abs(got - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
      }
    ++done;
  }
}

TEST_CASE("pairwise is permutation-equivariant") {
  Rng rng(43);
  const auto img = disk_mask(32, 32, 16, 16, 10);
  std::vector<Vec2> proj;
  for (int j = 0; j < 8; ++j)
    proj.push_back({rng.uniform(8.0, 24.0), rng.uniform(8.0, 24.0)});
  const auto base = pairwise_serial(img, proj, LossConfig{});

  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::vector<Vec2> shuffled(8);
  for (int j = 0; j < 8; ++j) shuffled[j] = proj[perm[j]];
  const auto permuted = pairwise_serial(img, shuffled, LossConfig{});
  for (int j = 0; j < 8; ++j)
    CHECK(permuted.l2[j] == doctest::Approx(base.l2[perm[j]]).epsilon(1e-12));
}

TEST_CASE("repulsion pushes two in-foreground projections apart") {
  const auto img = disk_mask(32, 32, 16, 16, 10);
  const std::vector<Vec2> proj{{14.25, 16.25}, {18.25, 16.25}};
  const auto r = pairwise_serial(img, proj, LossConfig{});
  // Gradient descent moves along -grad; pushing apart means the gradient on
  // the left point aims right (negative dot with p_j - p_j').
  const Vec2 d01 = proj[0] - proj[1];
  CHECK(r.grad[0].dot(d01) < 0.0);
  CHECK(r.grad[1].dot(d01) > 0.0);
  CHECK(r.grad[0].norm() > 0.0);
}

TEST_CASE("pair cutoff at 10 sigma matches the exact sum within 1e-6") {
  Rng rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    const auto img = disk_mask(64, 64, 32, 32, 20);
    std::vector<Vec2> proj;
    for (int j = 0; j < 60; ++j) {
      const double ang = rng.uniform(0, 6.2831853);
      const double rad = 18 * std::sqrt(rng.uniform());
      proj.push_back({32 + rad * std::cos(ang), 32 + rad * std::sin(ang)});
    }
    LossConfig exact;
    LossConfig cut;
    cut.pair_cutoff = 10.0 * cut.sigma;
    const auto a = pairwise_serial(img, proj, exact);
    const auto b = pairwise_serial(img, proj, cut);
    double sa = 0, sb = 0;
    for (int j = 0; j < 60; ++j) {
      sa += a.l2[j];
      sb += b.l2[j];
    }
    CHECK(rel_err(sb, sa) < 1e-6);
    for (int j = 0; j < 60; ++j) CHECK(rel_err(b.l2[j], a.l2[j], 1e-12) < 1e-6);
  }
}

TEST_CASE("short cutoff only prunes, never adds") {
  Rng rng(53);
  const auto img = disk_mask(64, 64, 32, 32, 20);
  std::vector<Vec2> proj;
  for (int j = 0; j < 40; ++j)
    proj.push_back({rng.uniform(14.0, 50.0), rng.uniform(14.0, 50.0)});
  LossConfig exact;
  LossConfig cut;
  cut.pair_cutoff = 0.1;  // 6.4 pixels
  const auto a = pairwise_serial(img, proj, exact);
  const auto b = pairwise_serial(img, proj, cut);
  for (int j = 0; j < 40; ++j) CHECK(b.l2[j] <= a.l2[j] + 1e-15);
}

TEST_CASE("pairwise parallel equals serial bit for bit") {
  Rng rng(59);
  const auto img = disk_mask(48, 48, 24, 24, 16);
  std::vector<Vec2> proj;
  for (int j = 0; j < 100; ++j)
    proj.push_back({rng.uniform(4.0, 44.0), rng.uniform(4.0, 44.0)});
  for (const bool with_cutoff : {false, true}) {
    LossConfig cfg;
    if (with_cutoff) cfg.pair_cutoff = 0.2;
    const auto s = pairwise_serial(img, proj, cfg);
    const auto p = pairwise(img, proj, cfg);
    for (int j = 0; j < 100; ++j) {
      CHECK(s.l2[j] == p.l2[j]);
      CHECK(s.grad[j].x == p.grad[j].x);
      CHECK(s.grad[j].y == p.grad[j].y);
    }
  }
}

TEST_CASE("include_self_pair adds the constant self term") {
  const auto img = disk_mask(32, 32, 16, 16, 10);
  const std::vector<Vec2> proj{{15.25, 16.25}, {17.25, 16.25}};
  LossConfig cfg;
  const auto without = pairwise_serial(img, proj, cfg);
  cfg.include_self_pair = true;
  const auto with = pairwise_serial(img, proj, cfg);
  // Deep inside: omega = 1, delta = 1, so the self term is e^1 each.
  CHECK(with.l2[0] - without.l2[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
  CHECK(with.l2[1] - without.l2[1] == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("no dead zones: smooth unary gradient is nonzero in the background") {
  Rng masks_rng(61);
  int nonzero = 0, total = 0;
  for (int m = 0; m < 4; ++m) {
    const auto img = random_mask(32, 32, masks_rng);
    const auto vg = smooth(img);
    Rng rng(100 + m);
    for (int i = 0; i < 2500; ++i) {
      const Vec2 p{rng.uniform(-8.0, 40.0), rng.uniform(-8.0, 40.0)};
      // Only background positions count.
      if (indicator_weight(img, p) > 0.0) continue;
      ++total;
      if (unary_smooth(vg, p).grad.norm() > 0.0) ++nonzero;
    }
  }
  REQUIRE(total > 1000);
  CHECK(static_cast<double>(nonzero) / total > 0.999);
}

TEST_CASE("binary contrast: most positions away from the boundary are flat") {
  Rng masks_rng(67);
  int zero = 0, total = 0;
  for (int m = 0; m < 4; ++m) {
    const auto img = random_mask(32, 32, masks_rng);
    const auto dist = distance_transform(img);
    Rng rng(200 + m);
    for (int i = 0; i < 2500; ++i) {
      const Vec2 p{rng.uniform(0.0, 31.0), rng.uniform(0.0, 31.0)};
      const int xi = static_cast<int>(std::round(p.x));
      const int yi = static_cast<int>(std::round(p.y));
      // Keep positions more than 2 pixels from the boundary (either side).
      const bool fg = img(xi, yi) != 0;
      if (!fg && dist(xi, yi) <= 2.0) continue;
      if (fg) {
        bool near_edge = false;
        for (int dy = -3; dy <= 3 && !near_edge; ++dy)
          for (int dx = -3; dx <= 3 && !near_edge; ++dx)
            if (img.mask().at_or(xi + dx, yi + dy, 0) == 0 &&
                std::hypot(dx, dy) <= 2.5)
              near_edge = true;
        if (near_edge) continue;
      }
      ++total;
      if (unary_binary(img, p).grad.norm() == 0.0) ++zero;
    }
  }
  REQUIRE(total > 1000);
  CHECK(static_cast<double>(zero) / total >= 0.5);
}

TEST_CASE("evaluate: all projections deep in foreground, pairwise off") {
  const auto img = full_foreground(16, 16);
  const Camera cam = look_at_camera({0, 0, -4}, {0, 0, 0}, {0, 1, 0}, 20, 16, 16);
  std::vector<View> views;
  views.push_back(View{smooth(img), cam});

  PointCloud cloud;
  Rng rng(71);
  for (int j = 0; j < 10; ++j)
    cloud.points.push_back(
        {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});

  LossConfig cfg;
  cfg.pairwise_enabled = false;
  const auto report = evaluate(cloud, views, cfg);
  CHECK(report.total == 0.0);
  for (const auto& g : report.per_point_grad) CHECK(g.norm() == 0.0);
  CHECK(report.in_foreground_fraction == 1.0);
}

TEST_CASE("evaluate: single point single view equals the unary term") {
  Rng rng(73);
  const auto img = random_mask(32, 32, rng);
  const Camera cam = look_at_camera({0, 0, -4}, {0, 0, 0}, {0, 1, 0}, 40, 32, 32);
  std::vector<View> views;
  views.push_back(View{smooth(img), cam});

  PointCloud cloud;
  cloud.points.push_back({0.21, -0.13, 0.05});

  LossConfig cfg;
  cfg.pairwise_enabled = false;
  const auto report = evaluate(cloud, views, cfg);
  const Projection pr = project(cam, cloud.points[0]);
  REQUIRE(pr.valid);
  CHECK(report.total ==
        doctest::Approx(unary_smooth(views[0].smooth, pr.p).value).epsilon(1e-12));
}

TEST_CASE("evaluate errors on empty inputs") {
  const auto img = full_foreground(8, 8);
  const Camera cam = look_at_camera({0, 0, -4}, {0, 0, 0}, {0, 1, 0}, 10, 8, 8);
  std::vector<View> views;
  views.push_back(View{smooth(img), cam});
  PointCloud cloud;
  CHECK_THROWS_AS(evaluate(cloud, views, LossConfig{}), EmptyCloudError);
  cloud.points.push_back({0, 0, 0});
  CHECK_THROWS_AS(evaluate(cloud, {}, LossConfig{}), EmptyViewsError);
}

TEST_CASE("evaluate end-to-end gradients match finite differences") {
  // Attached weights make the analytic gradient the full derivative, so the
  // finite-difference oracle applies everywhere off cell boundaries.
  Rng rng(79);
  const auto img = disk_mask(16, 16, 8, 8, 5);
  std::vector<View> views;
  views.push_back(View{smooth(img),
                       look_at_camera({0, 0, -4}, {0, 0, 0}, {0, 1, 0}, 30, 16, 16)});
  views.push_back(View{smooth(img),
                       look_at_camera({4, 0, 0}, {0, 0, 0}, {0, 0, 1}, 30, 16, 16)});

  LossConfig cfg;
  cfg.detach_weights = false;

  PointCloud cloud;
  int tries = 0;
  while (static_cast<int>(cloud.size()) < 16 && tries < 4000) {
    ++tries;
    const Vec3 n{rng.uniform(-0.35, 0.35), rng.uniform(-0.35, 0.35),
                 rng.uniform(-0.35, 0.35)};
    bool ok = true;
    for (const auto& v : views) {
      const Projection pr = project(v.camera, n);
      if (!pr.valid || std::abs(pr.p.x - std::round(pr.p.x)) < 5e-3 ||
          std::abs(pr.p.y - std::round(pr.p.y)) < 5e-3) {
        ok = false;
        break;
      }
    }
    if (ok) cloud.points.push_back(n);
  }
  REQUIRE(cloud.size() == 16);

  const auto report = evaluate(cloud, views, cfg);
  const double h = 1e-5;
  for (size_t j = 0; j < cloud.size(); ++j) {
    Vec3 fd;
    for (int axis = 0; axis < 3; ++axis) {
      PointCloud plus = cloud, minus = cloud;
      auto& pj = axis == 0   ? plus.points[j].x
                 : axis == 1 ? plus.points[j].y
                             : plus.points[j].z;
      auto& mj = axis == 0   ? minus.points[j].x
                 : axis == 1 ? minus.points[j].y
                             : minus.points[j].z;
      pj += h;
      mj -= h;
      const double fdv = (evaluate(plus, views, cfg).total -
                          evaluate(minus, views, cfg).total) /
                         (2 * h);
      (axis == 0 ? fd.x : axis == 1 ? fd.y : fd.z) = fdv;
    }
    const double denom = std::max(fd.norm(), 1e-7);
    CHECK((report.per_point_grad[j] - fd).norm() / denom < 1e-4);
  }
}

TEST_CASE("evaluate parallel equals serial bit for bit") {
  Rng rng(83);
  const auto img = disk_mask(32, 32, 16, 16, 10);
  std::vector<View> views;
  views.push_back(View{smooth(img),
                       look_at_camera({0, 0, -4}, {0, 0, 0}, {0, 1, 0}, 40, 32, 32)});
  views.push_back(View{smooth(img),
                       look_at_camera({0, -4, 0}, {0, 0, 0}, {0, 0, 1}, 40, 32, 32)});
  PointCloud cloud;
  for (int j = 0; j < 64; ++j)
    cloud.points.push_back(
        {rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)});

  for (const bool detach : {true, false}) {
    LossConfig cfg;
    cfg.detach_weights = detach;
    const auto a = evaluate(cloud, views, cfg);
    const auto b = evaluate_serial(cloud, views, cfg);
    CHECK(a.total == b.total);
    CHECK(a.unary_sum == b.unary_sum);
    CHECK(a.pairwise_sum == b.pairwise_sum);
    for (size_t j = 0; j < cloud.size(); ++j) {
      CHECK(a.per_point_grad[j].x == b.per_point_grad[j].x);
      CHECK(a.per_point_grad[j].y == b.per_point_grad[j].y);
      CHECK(a.per_point_grad[j].z == b.per_point_grad[j].z);
    }
  }
}

TEST_CASE("monotone pull: a small descent step never increases the unary loss") {
  Rng rng(89);
  const auto img = disk_mask(32, 32, 16, 16, 8);
  std::vector<View> views;
  views.push_back(View{smooth(img),
                       look_at_camera({0, 0, -4}, {0, 0, 0}, {0, 1, 0}, 40, 32, 32)});
  LossConfig cfg;
  cfg.pairwise_enabled = false;

  int done = 0;
  while (done < 50) {
    PointCloud cloud;
    cloud.points.push_back(
        {rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)});
    const Projection pr = project(views[0].camera, cloud.points[0]);
    if (!pr.valid) continue;
    if (std::abs(pr.p.x - std::round(pr.p.x)) < 1e-2 ||
        std::abs(pr.p.y - std::round(pr.p.y)) < 1e-2)
      continue;
    const auto report = evaluate(cloud, views, cfg);
    PointCloud stepped = cloud;
    stepped.points[0] += report.per_point_grad[0] * -1e-4;
    const auto after = evaluate(stepped, views, cfg);
    CHECK(after.total <= report.total + 1e-12);
    ++done;
  }
}

TEST_CASE("loss report serializes to JSON with per-view entries") {
  const auto img = disk_mask(16, 16, 8, 8, 5);
  std::vector<View> views;
  views.push_back(View{smooth(img),
                       look_at_camera({0, 0, -4}, {0, 0, 0}, {0, 1, 0}, 20, 16, 16)});
  PointCloud cloud;
  cloud.points.push_back({0.1, 0.0, 0.0});
  cloud.points.push_back({-0.1, 0.05, 0.0});
  const auto report = evaluate(cloud, views, LossConfig{});
  const auto j = loss_report_to_json(report);
  CHECK(j.contains("total"));
  CHECK(j.contains("unary_sum"));
  CHECK(j.contains("pairwise_sum"));
  CHECK(j.contains("in_foreground_fraction"));
  CHECK(j["per_view"].size() == 1);
  CHECK(j["total"].get<double>() == doctest::Approx(report.total));
}

TEST_CASE("loss config JSON round-trips") {
  LossConfig cfg;
  cfg.beta = 2.5;
  cfg.sigma = 0.75;
  cfg.scales = 3;
  cfg.unary_mode = UnaryMode::kBinary;
  cfg.detach_weights = false;
  cfg.pair_cutoff = 0.25;
  const LossConfig back = loss_config_from_json(loss_config_to_json(cfg));
  CHECK(back.beta == cfg.beta);
  CHECK(back.sigma == cfg.sigma);
  CHECK(back.scales == cfg.scales);
  CHECK(back.unary_mode == UnaryMode::kBinary);
  CHECK(back.detach_weights == false);
  REQUIRE(back.pair_cutoff.has_value());
  CHECK(*back.pair_cutoff == 0.25);
}
