#include "drwr/loss.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "drwr/runtime.hpp"

namespace drwr {

FieldSample unary_smooth(const SmoothSilhouette& vg, const Vec2& p) {
  const FieldSample s = sample_field(vg.field, p);
  return {1.0 - s.value, {-s.grad.x, -s.grad.y}};
}

FieldSample unary_binary(const SilhouetteImage& v, const Vec2& p) {
  const FieldSample s = sample_mask(v, p);
  return {1.0 - s.value, {-s.grad.x, -s.grad.y}};
}

double indicator_weight(const SilhouetteImage& v, const Vec2& p) {
  return sample_mask(v, p).value;
}

namespace {

// Bilinear interpolation of the mask on the stride-r cell anchored at p's
// pixel: corners (x0, y0) + {0, r}^2 with x0 = floor(p.x). Reduces to
// standard bilinear at r = 1 and widens the receptive square linearly.
FieldSample stride_bilinear(const SilhouetteImage& v, const Vec2& p, int r) {
  const int x0 = static_cast<int>(std::floor(p.x));
  const int y0 = static_cast<int>(std::floor(p.y));
  const double fx = (p.x - x0) / r;
  const double fy = (p.y - y0) / r;

  const auto& m = v.mask();
  const double v00 = m.at_or(x0, y0, 0);
  const double v10 = m.at_or(x0 + r, y0, 0);
  const double v01 = m.at_or(x0, y0 + r, 0);
  const double v11 = m.at_or(x0 + r, y0 + r, 0);

  FieldSample s;
  s.value = (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
            (1 - fx) * fy * v01 + fx * fy * v11;
  s.grad.x = ((1 - fy) * (v10 - v00) + fy * (v11 - v01)) / r;
  s.grad.y = ((1 - fx) * (v01 - v00) + fx * (v11 - v10)) / r;
  return s;
}

// Corner offsets of standard bilinear placement scaled by r, with the mask
// resampled bilinearly at the scaled corners.
FieldSample scaled_corners(const SilhouetteImage& v, const Vec2& p, int r) {
  const double fx = p.x - std::floor(p.x);
  const double fy = p.y - std::floor(p.y);
  const double ox[2] = {-r * fx, r * (1.0 - fx)};
  const double oy[2] = {-r * fy, r * (1.0 - fy)};
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  const double dwx[2] = {-1.0, 1.0};
  const double dwy[2] = {-1.0, 1.0};
  const double dq = 1.0 - r;  // d(corner position)/d(p) along each axis

  FieldSample s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const FieldSample c = sample_mask(v, {p.x + ox[i], p.y + oy[j]});
      s.value += wx[i] * wy[j] * c.value;
      s.grad.x += dwx[i] * wy[j] * c.value + wx[i] * wy[j] * c.grad.x * dq;
      s.grad.y += wx[i] * dwy[j] * c.value + wx[i] * wy[j] * c.grad.y * dq;
    }
  return s;
}

}  // namespace

FieldSample boundary_bias_sample(const SilhouetteImage& v, const Vec2& p,
                                 int scales, BiasInterp interp) {
  FieldSample acc;
  for (int r = 1; r <= scales; ++r) {
    const FieldSample s = interp == BiasInterp::kStrideBilinear
                              ? stride_bilinear(v, p, r)
                              : scaled_corners(v, p, r);
    acc.value += s.value;
    acc.grad += s.grad;
  }
  acc.value /= scales;
  acc.grad.x /= scales;
  acc.grad.y /= scales;
  return acc;
}

double boundary_bias(const SilhouetteImage& v, const Vec2& p, int scales) {
  return boundary_bias_sample(v, p, scales, BiasInterp::kStrideBilinear).value;
}

namespace {

struct PairTerms {
  std::vector<FieldSample> w;     // indicator weights
  std::vector<FieldSample> bias;  // boundary biases
  std::vector<double> eb;         // exp(bias)
};

PairTerms pair_terms(const SilhouetteImage& v, std::span<const Vec2> proj,
                     const LossConfig& cfg, bool parallel) {
  const int n = static_cast<int>(proj.size());
  PairTerms t;
  t.w.resize(n);
  t.bias.resize(n);
  t.eb.resize(n);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (parallel)
  for (int j = 0; j < n; ++j) {
    t.w[j] = cfg.indicator_enabled ? sample_mask(v, proj[j])
                                   : FieldSample{1.0, {0.0, 0.0}};
    t.bias[j] = cfg.bias_enabled
                    ? boundary_bias_sample(v, proj[j], cfg.scales, cfg.bias_interp)
                    : FieldSample{0.0, {0.0, 0.0}};
    t.eb[j] = std::exp(t.bias[j].value);
  }
  return t;
}

// Accumulates one point's repulsion loss and gradient over a fixed-order
// candidate sequence. Summation order is the candidate order, so results are
// independent of the thread count.
template <typename Candidates>
void accumulate_point(int j, std::span<const Vec2> proj, const PairTerms& t,
                      const LossConfig& cfg, double inv_width, double cutoff,
                      Candidates&& for_each_candidate, double& l2_out,
                      Vec2& grad_out) {
  const double inv_sigma = 1.0 / cfg.sigma;
  const Vec2 pj = proj[j];
  const double wj = t.w[j].value;
  const double ebj = t.eb[j];

  double s_j = 0.0;   // sum_{j'} w_{j'} exp(-d/sigma)
  double t_j = 0.0;   // sum_{j'} w_{j'} eb_{j'} exp(-d/sigma)
  Vec2 kernel_grad;   // distance-kernel part of the gradient

  for_each_candidate([&](int k) {
    if (k == j) return;
    const Vec2 diff = pj - proj[k];
    const double dist_px = diff.norm();
    const double d = dist_px * inv_width;
    if (cutoff >= 0.0 && d > cutoff) return;
    const double kern = std::exp(-d * inv_sigma);
    const double wk = t.w[k].value;
    s_j += wk * kern;
    t_j += wk * t.eb[k] * kern;
    if (dist_px > 1e-12) {
      // d(d)/dp_j = diff / (dist_px * W); both l2_j and l2_k carry the pair.
      const double coef =
          -(wj * wk * kern) * (ebj + t.eb[k]) * inv_sigma * inv_width / dist_px;
      kernel_grad += diff * coef;
    }
  });

  double l2 = wj * ebj * s_j;
  Vec2 grad = kernel_grad;
  if (cfg.include_self_pair) l2 += wj * wj * ebj;

  if (!cfg.detach_weights) {
    // d(sum_k l2_k)/dw_j and /dbias_j, chained through the mask samplers.
    double dl_dw = ebj * s_j + t_j;
    double dl_db = wj * ebj * s_j;
    if (cfg.include_self_pair) {
      dl_dw += 2.0 * wj * ebj;
      dl_db += wj * wj * ebj;
    }
    grad += t.w[j].grad * dl_dw + t.bias[j].grad * dl_db;
  }
  l2_out = l2;
  grad_out = grad;
}

PairwiseResult pairwise_impl(const SilhouetteImage& v,
                             std::span<const Vec2> proj, const LossConfig& cfg,
                             bool parallel) {
  const int n = static_cast<int>(proj.size());
  PairwiseResult out;
  out.l2.assign(n, 0.0);
  out.grad.assign(n, Vec2{});
  if (n == 0) return out;

  const PairTerms t = pair_terms(v, proj, cfg, parallel);
  const double inv_width = 1.0 / v.width();

  if (!cfg.pair_cutoff) {
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (parallel)
    for (int j = 0; j < n; ++j) {
      accumulate_point(
          j, proj, t, cfg, inv_width, -1.0,
          [&](auto&& fn) {
            for (int k = 0; k < n; ++k) fn(k);
          },
          out.l2[j], out.grad[j]);
    }
    return out;
  }

  // Cutoff path: uniform grid binning over the image plane with cell size
  // equal to the cutoff radius in pixels. Candidates are visited bin by bin
  // in row-major order, ascending index within each bin.
  const double cutoff = *cfg.pair_cutoff;
  const double cell = std::max(cutoff * v.width(), 1e-9);
  const auto bin_of = [&](const Vec2& p) {
    const int bx = static_cast<int>(std::floor(std::clamp(p.x, 0.0, v.width() - 1.0) / cell));
    const int by = static_cast<int>(std::floor(std::clamp(p.y, 0.0, v.height() - 1.0) / cell));
    return std::pair<int, int>{bx, by};
  };
  const int nbx = static_cast<int>(std::floor((v.width() - 1.0) / cell)) + 1;
  const int nby = static_cast<int>(std::floor((v.height() - 1.0) / cell)) + 1;
  std::vector<std::vector<int>> bins(static_cast<size_t>(nbx) * nby);
  for (int k = 0; k < n; ++k) {
    const auto [bx, by] = bin_of(proj[k]);
    bins[static_cast<size_t>(by) * nbx + bx].push_back(k);
  }

#pragma omp parallel for schedule(static) num_threads(thread_count()) if (parallel)
  for (int j = 0; j < n; ++j) {
    const auto [bx, by] = bin_of(proj[j]);
    accumulate_point(
        j, proj, t, cfg, inv_width, cutoff,
        [&](auto&& fn) {
          for (int cy = std::max(0, by - 1); cy <= std::min(nby - 1, by + 1); ++cy)
            for (int cx = std::max(0, bx - 1); cx <= std::min(nbx - 1, bx + 1); ++cx)
              for (int k : bins[static_cast<size_t>(cy) * nbx + cx]) fn(k);
        },
        out.l2[j], out.grad[j]);
  }
  return out;
}

}  // namespace

PairwiseResult pairwise(const SilhouetteImage& v, std::span<const Vec2> proj,
                        const LossConfig& cfg) {
  return pairwise_impl(v, proj, cfg, true);
}

PairwiseResult pairwise_serial(const SilhouetteImage& v,
                               std::span<const Vec2> proj,
                               const LossConfig& cfg) {
  return pairwise_impl(v, proj, cfg, false);
}

namespace {

LossReport evaluate_impl(const PointCloud& cloud, std::span<const View> views,
                         const LossConfig& cfg, bool parallel) {
  if (views.empty()) throw EmptyViewsError("evaluate: no views");
  if (cloud.empty()) throw EmptyCloudError("evaluate: empty point cloud");

  const int view_count = static_cast<int>(views.size());
  const int point_count = static_cast<int>(cloud.size());
  const double norm = 1.0 / (static_cast<double>(view_count) * point_count);

  LossReport report;
  report.per_point_grad.assign(point_count, Vec3{});

  double l1_total = 0.0;
  double l2_total = 0.0;
  double fg_fraction_sum = 0.0;

  std::vector<Projection> proj(point_count);
  std::vector<FieldSample> unary(point_count);
  std::vector<double> omega(point_count);

  for (int i = 0; i < view_count; ++i) {
    const View& view = views[i];

#pragma omp parallel for schedule(static) num_threads(thread_count()) if (parallel)
    for (int j = 0; j < point_count; ++j)
      proj[j] = project(view.camera, cloud.points[j]);

    std::vector<int> valid_idx;
    valid_idx.reserve(point_count);
    for (int j = 0; j < point_count; ++j)
      if (proj[j].valid) valid_idx.push_back(j);
    const int nv = static_cast<int>(valid_idx.size());

    std::vector<Vec2> vp(nv);
    for (int k = 0; k < nv; ++k) vp[k] = proj[valid_idx[k]].p;

#pragma omp parallel for schedule(static) num_threads(thread_count()) if (parallel)
    for (int k = 0; k < nv; ++k) {
      unary[k] = cfg.unary_enabled
                     ? (cfg.unary_mode == UnaryMode::kSmooth
                            ? unary_smooth(view.smooth, vp[k])
                            : unary_binary(view.mask(), vp[k]))
                     : FieldSample{};
      omega[k] = indicator_weight(view.mask(), vp[k]);
    }

    PairwiseResult pw;
    if (cfg.pairwise_enabled)
      pw = pairwise_impl(view.mask(), vp, cfg, parallel);

    double l1_view = 0.0;
    double l2_view = 0.0;
    int fg_count = 0;
    for (int k = 0; k < nv; ++k) {
      if (cfg.unary_enabled) l1_view += unary[k].value;
      if (cfg.pairwise_enabled) l2_view += pw.l2[k];
      if (omega[k] >= 0.5) ++fg_count;
    }
    l1_total += l1_view;
    l2_total += l2_view;
    fg_fraction_sum += static_cast<double>(fg_count) / point_count;
    report.per_view.push_back(
        {i, l1_view / point_count, l2_view / point_count});

#pragma omp parallel for schedule(static) num_threads(thread_count()) if (parallel)
    for (int k = 0; k < nv; ++k) {
      const int j = valid_idx[k];
      Vec2 g2d{};
      if (cfg.unary_enabled) g2d += unary[k].grad;
      if (cfg.pairwise_enabled) g2d += pw.grad[k] * cfg.beta;
      const Mat23 jac = project_jacobian(view.camera, cloud.points[j]);
      report.per_point_grad[j] += jac.apply_transposed(g2d) * norm;
    }
  }

  report.unary_sum = l1_total * norm;
  report.pairwise_sum = l2_total * norm;
  report.total = (cfg.unary_enabled ? report.unary_sum : 0.0) +
                 (cfg.pairwise_enabled ? cfg.beta * report.pairwise_sum : 0.0);
  report.in_foreground_fraction = fg_fraction_sum / view_count;
  return report;
}

}  // namespace

LossReport evaluate(const PointCloud& cloud, std::span<const View> views,
                    const LossConfig& cfg) {
  return evaluate_impl(cloud, views, cfg, true);
}

LossReport evaluate_serial(const PointCloud& cloud, std::span<const View> views,
                           const LossConfig& cfg) {
  return evaluate_impl(cloud, views, cfg, false);
}

nlohmann::json loss_report_to_json(const LossReport& report) {
  nlohmann::json j;
  j["total"] = report.total;
  j["unary_sum"] = report.unary_sum;
  j["pairwise_sum"] = report.pairwise_sum;
  j["in_foreground_fraction"] = report.in_foreground_fraction;
  j["per_view"] = nlohmann::json::array();
  for (const auto& v : report.per_view)
    j["per_view"].push_back(
        {{"view", v.view}, {"l1_mean", v.l1_mean}, {"l2_mean", v.l2_mean}});
  return j;
}

void save_gradients_blob(const LossReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& g : report.per_point_grad) {
    const float buf[3] = {static_cast<float>(g.x), static_cast<float>(g.y),
                          static_cast<float>(g.z)};
    out.write(reinterpret_cast<const char*>(buf), sizeof(buf));
  }
}

nlohmann::json loss_config_to_json(const LossConfig& cfg) {
  nlohmann::json j;
  j["beta"] = cfg.beta;
  j["sigma"] = cfg.sigma;
  j["scales"] = cfg.scales;
  j["unary_mode"] = cfg.unary_mode == UnaryMode::kSmooth ? "smooth" : "binary";
  j["unary_enabled"] = cfg.unary_enabled;
  j["pairwise_enabled"] = cfg.pairwise_enabled;
  j["indicator_enabled"] = cfg.indicator_enabled;
  j["bias_enabled"] = cfg.bias_enabled;
  j["detach_weights"] = cfg.detach_weights;
  j["include_self_pair"] = cfg.include_self_pair;
  j["bias_interp"] = cfg.bias_interp == BiasInterp::kStrideBilinear
                         ? "stride_bilinear"
                         : "scaled_corners";
  if (cfg.pair_cutoff)
    j["pair_cutoff"] = *cfg.pair_cutoff;
  else
    j["pair_cutoff"] = nullptr;
  return j;
}

LossConfig loss_config_from_json(const nlohmann::json& j) {
  LossConfig cfg;
  cfg.beta = j.value("beta", cfg.beta);
  cfg.sigma = j.value("sigma", cfg.sigma);
  cfg.scales = j.value("scales", cfg.scales);
  cfg.unary_mode = j.value("unary_mode", std::string("smooth")) == "binary"
                       ? UnaryMode::kBinary
                       : UnaryMode::kSmooth;
  cfg.unary_enabled = j.value("unary_enabled", cfg.unary_enabled);
  cfg.pairwise_enabled = j.value("pairwise_enabled", cfg.pairwise_enabled);
  cfg.indicator_enabled = j.value("indicator_enabled", cfg.indicator_enabled);
  cfg.bias_enabled = j.value("bias_enabled", cfg.bias_enabled);
  cfg.detach_weights = j.value("detach_weights", cfg.detach_weights);
  cfg.include_self_pair = j.value("include_self_pair", cfg.include_self_pair);
  cfg.bias_interp =
      j.value("bias_interp", std::string("stride_bilinear")) == "scaled_corners"
          ? BiasInterp::kScaledCorners
          : BiasInterp::kStrideBilinear;
  if (j.contains("pair_cutoff") && !j["pair_cutoff"].is_null())
    cfg.pair_cutoff = j["pair_cutoff"].get<double>();
  return cfg;
}

}  // namespace drwr
