#pragma once

#include <span>
#include <string>
#include <vector>

#include "drwr/loss.hpp"

#include <json.hpp>

namespace drwr {

enum class InitKind { kUniformCube, kGaussian, kFromFile };

struct FitConfig {
  int steps = 5000;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 0;
  InitKind init = InitKind::kUniformCube;
  double init_half_extent = 0.5;
  double init_stddev = 0.25;
  std::string init_file;
  int log_every = 1;
  LossConfig loss;
};

struct TraceRecord {
  int step = 0;
  double total = 0.0;
  double unary = 0.0;
  double pairwise = 0.0;
  double fg_fraction = 0.0;
  double ms = 0.0;  // wall time since fit start
};

struct FitTrace {
  std::vector<TraceRecord> records;
};

struct FitResult {
  PointCloud cloud;
  FitTrace trace;
};

/// Optimization aborted on a NaN/Inf loss or gradient; carries the partial
/// trace and the cloud at the abort point.
struct NonFiniteLossError : std::runtime_error {
  NonFiniteLossError(const std::string& what, FitResult partial_result)
      : std::runtime_error(what), partial(std::move(partial_result)) {}
  FitResult partial;
};

/// Raw fit input: one mask and the camera that produced it.
struct ViewInput {
  SilhouetteImage mask;
  Camera camera;
};

/// Precomputes the smooth silhouettes once per view.
std::vector<View> prepare_views(std::span<const ViewInput> inputs);

/// Runs Adam on the 3J free point coordinates against the DRWR loss.
/// Bit-deterministic for fixed inputs, config and seed at any thread count.
FitResult fit(std::span<const ViewInput> views, int point_count,
              const FitConfig& cfg);

/// Like fit, but also writes an optimizer checkpoint to `checkpoint_path`
/// when non-empty.
FitResult fit_with_checkpoint(std::span<const ViewInput> views, int point_count,
                              const FitConfig& cfg,
                              const std::string& checkpoint_path);

/// Continues a checkpointed run for `additional_steps`; the result is
/// bit-equal to an uninterrupted run of the same total length. The views
/// must be the ones the checkpointed fit was started with.
FitResult resume(const std::string& checkpoint_path,
                 std::span<const ViewInput> views, int additional_steps,
                 const std::string& new_checkpoint_path = "");

void save_trace_csv(const FitTrace& trace, const std::string& path);

nlohmann::json fit_config_to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const nlohmann::json& j);

}  // namespace drwr
