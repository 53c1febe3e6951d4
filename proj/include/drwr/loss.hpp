#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drwr/camera.hpp"
#include "drwr/pointcloud.hpp"
#include "drwr/silhouette.hpp"

#include <json.hpp>

namespace drwr {

enum class UnaryMode { kSmooth, kBinary };

/// Functional form of the multi-scale boundary-bias interpolation.
/// kStrideBilinear samples the mask on the lattice subsampled by stride r;
/// kScaledCorners scales the four bilinear corner offsets by r and resamples
/// the mask bilinearly at those positions.
enum class BiasInterp { kStrideBilinear, kScaledCorners };

struct LossConfig {
  double beta = 3.0;   // balance between unary and pairwise terms
  double sigma = 1.0;  // repulsion decay
  int scales = 5;      // R, boundary-bias scales

  UnaryMode unary_mode = UnaryMode::kSmooth;
  bool unary_enabled = true;
  bool pairwise_enabled = true;
  bool indicator_enabled = true;
  bool bias_enabled = true;

  /// Stop gradients through the indicator weights and boundary bias.
  bool detach_weights = true;
  /// Include the j'=j term of the repulsion sum (constant e^{delta_j}).
  bool include_self_pair = false;

  BiasInterp bias_interp = BiasInterp::kStrideBilinear;

  /// Repulsion cutoff radius in width-normalized units; pairs farther apart
  /// contribute nothing and a uniform grid accelerates the sum.
  std::optional<double> pair_cutoff;
};

struct PerViewLoss {
  int view = 0;
  double l1_mean = 0.0;
  double l2_mean = 0.0;
};

struct LossReport {
  double total = 0.0;
  double unary_sum = 0.0;
  double pairwise_sum = 0.0;
  double in_foreground_fraction = 0.0;
  std::vector<Vec3> per_point_grad;
  std::vector<PerViewLoss> per_view;
};

/// One observation: ground-truth mask (carried inside the smooth field) plus
/// the camera that produced it.
struct View {
  SmoothSilhouette smooth;
  Camera camera;

  const SilhouetteImage& mask() const { return smooth.source; }
};

/// Smooth silhouette unary term: 1 - v^G(p) and its position gradient.
FieldSample unary_smooth(const SmoothSilhouette& vg, const Vec2& p);

/// Binary unary term: 1 - v(p) through bilinear mask sampling. Zero gradient
/// wherever the four surrounding pixels agree.
FieldSample unary_binary(const SilhouetteImage& v, const Vec2& p);

/// Bilinear sample of the binary mask at p; 0 out of bounds.
double indicator_weight(const SilhouetteImage& v, const Vec2& p);

/// Mean over scales r = 1..R of the stride-r interpolation of the mask.
double boundary_bias(const SilhouetteImage& v, const Vec2& p, int scales);
FieldSample boundary_bias_sample(const SilhouetteImage& v, const Vec2& p,
                                 int scales, BiasInterp interp);

struct PairwiseResult {
  std::vector<double> l2;    // per-point repulsion losses
  std::vector<Vec2> grad;    // d(sum_j l2_j)/dp_j per point
};

/// Structure-aware repulsion over the valid projections of one view.
/// Distances are L2 pixel distances divided by the image width.
PairwiseResult pairwise(const SilhouetteImage& v,
                        std::span<const Vec2> projections,
                        const LossConfig& cfg);
PairwiseResult pairwise_serial(const SilhouetteImage& v,
                               std::span<const Vec2> projections,
                               const LossConfig& cfg);

/// Projects every point into every view and accumulates the total loss
/// L = (1/(I*J)) sum_i sum_j (l1 + beta * l2) together with the per-point
/// 3D gradients. Deterministic for any thread count.
LossReport evaluate(const PointCloud& cloud, std::span<const View> views,
                    const LossConfig& cfg);
LossReport evaluate_serial(const PointCloud& cloud, std::span<const View> views,
                           const LossConfig& cfg);

nlohmann::json loss_report_to_json(const LossReport& report);

/// Binary float32 J x 3 gradient blob for downstream consumers.
void save_gradients_blob(const LossReport& report, const std::string& path);

nlohmann::json loss_config_to_json(const LossConfig& cfg);
LossConfig loss_config_from_json(const nlohmann::json& j);

}  // namespace drwr
