#include "drwr/fitter.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include "drwr/rng.hpp"

namespace drwr {

namespace {

constexpr char kCheckpointMagic[8] = {'D', 'R', 'W', 'R', 'C', 'K', 'P', 'T'};
constexpr uint32_t kCheckpointVersion = 1;

struct AdamState {
  std::vector<Vec3> m;
  std::vector<Vec3> v;
  int64_t step = 0;  // number of updates applied so far
};

PointCloud initial_cloud(int point_count, const FitConfig& cfg) {
  PointCloud cloud;
  cloud.points.reserve(point_count);
  if (cfg.init == InitKind::kFromFile) {
    cloud = load_cloud(cfg.init_file);
    if (static_cast<int>(cloud.size()) != point_count)
      throw std::invalid_argument("init file point count does not match J");
    return cloud;
  }
  Rng rng(cfg.seed);
  for (int j = 0; j < point_count; ++j) {
    Vec3 p;
    if (cfg.init == InitKind::kUniformCube) {
      p = {rng.uniform(-cfg.init_half_extent, cfg.init_half_extent),
           rng.uniform(-cfg.init_half_extent, cfg.init_half_extent),
           rng.uniform(-cfg.init_half_extent, cfg.init_half_extent)};
    } else {
      p = {rng.normal() * cfg.init_stddev, rng.normal() * cfg.init_stddev,
           rng.normal() * cfg.init_stddev};
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

void write_checkpoint(const std::string& path, const PointCloud& cloud,
                      const AdamState& adam, const FitConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kCheckpointMagic, 8);
  const uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  const uint64_t j = cloud.size();
  out.write(reinterpret_cast<const char*>(&j), 8);
  const int64_t step = adam.step;
  out.write(reinterpret_cast<const char*>(&step), 8);
  const auto write_vecs = [&](const std::vector<Vec3>& vs) {
    for (const auto& v : vs) {
      const double xyz[3] = {v.x, v.y, v.z};
      out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    }
  };
  write_vecs(cloud.points);
  write_vecs(adam.m);
  write_vecs(adam.v);
  const std::string cfg_json = fit_config_to_json(cfg).dump();
  const uint64_t len = cfg_json.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(cfg_json.data(), static_cast<std::streamsize>(len));
}

void read_checkpoint(const std::string& path, PointCloud& cloud,
                     AdamState& adam, FitConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptCheckpointError("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw CorruptCheckpointError(path + ": bad magic");
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (!in || version != kCheckpointVersion)
    throw CorruptCheckpointError(path + ": unsupported version");
  uint64_t j = 0;
  in.read(reinterpret_cast<char*>(&j), 8);
  int64_t step = 0;
  in.read(reinterpret_cast<char*>(&step), 8);
  if (!in || j == 0 || j > (1ull << 32) || step < 0)
    throw CorruptCheckpointError(path + ": bad header");

  const auto read_vecs = [&](std::vector<Vec3>& vs) {
    vs.resize(j);
    for (auto& v : vs) {
      double xyz[3];
      in.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
      if (!in) throw CorruptCheckpointError(path + ": truncated state");
      v = {xyz[0], xyz[1], xyz[2]};
    }
  };
  read_vecs(cloud.points);
  read_vecs(adam.m);
  read_vecs(adam.v);
  adam.step = step;

  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  if (!in || len > (1ull << 24))
    throw CorruptCheckpointError(path + ": bad config length");
  std::string cfg_json(len, '\0');
  in.read(cfg_json.data(), static_cast<std::streamsize>(len));
  if (!in) throw CorruptCheckpointError(path + ": truncated config");
  try {
    cfg = fit_config_from_json(nlohmann::json::parse(cfg_json));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError(path + ": bad config json: " + e.what());
  }
}

// Runs `extra_steps` Adam updates starting from the given state. The trace
// covers [start, start + extra_steps]; record at step s is the loss at the
// parameters after s updates.
FitResult run_adam(std::span<const View> views, PointCloud cloud,
                   AdamState adam, const FitConfig& cfg, int extra_steps,
                   const std::string& checkpoint_path) {
  const int point_count = static_cast<int>(cloud.size());
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  FitTrace trace;
  const auto log_record = [&](int step, const LossReport& report) {
    trace.records.push_back({step, report.total, report.unary_sum,
                             report.pairwise_sum, report.in_foreground_fraction,
                             elapsed_ms()});
  };

  const auto check_finite = [&](const LossReport& r, int step) {
    bool ok = std::isfinite(r.total);
    for (const auto& g : r.per_point_grad) ok = ok && finite(g);
    if (!ok)
      throw NonFiniteLossError(
          "non-finite loss or gradient at step " + std::to_string(step),
          FitResult{std::move(cloud), std::move(trace)});
  };

  const int start = static_cast<int>(adam.step);
  const int end = start + extra_steps;
  LossReport report = evaluate(cloud, views, cfg.loss);
  check_finite(report, start);
  log_record(start, report);

  for (int step = start + 1; step <= end; ++step) {
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (int j = 0; j < point_count; ++j) {
      const Vec3 g = report.per_point_grad[j];
      Vec3& m = adam.m[j];
      Vec3& v = adam.v[j];
      m = m * b1 + g * (1.0 - b1);
      v = {v.x * b2 + g.x * g.x * (1.0 - b2), v.y * b2 + g.y * g.y * (1.0 - b2),
           v.z * b2 + g.z * g.z * (1.0 - b2)};
      const Vec3 mhat = m * (1.0 / bias1);
      const Vec3 vhat = v * (1.0 / bias2);
      cloud.points[j].x -= cfg.learning_rate * mhat.x / (std::sqrt(vhat.x) + cfg.adam_eps);
      cloud.points[j].y -= cfg.learning_rate * mhat.y / (std::sqrt(vhat.y) + cfg.adam_eps);
      cloud.points[j].z -= cfg.learning_rate * mhat.z / (std::sqrt(vhat.z) + cfg.adam_eps);
    }
    adam.step = step;

    report = evaluate(cloud, views, cfg.loss);
    check_finite(report, step);
    if (step == end || step % cfg.log_every == 0) log_record(step, report);
  }

  if (!checkpoint_path.empty())
    write_checkpoint(checkpoint_path, cloud, adam, cfg);
  return FitResult{std::move(cloud), std::move(trace)};
}

}  // namespace

std::vector<View> prepare_views(std::span<const ViewInput> inputs) {
  std::vector<View> views;
  views.reserve(inputs.size());
  for (const auto& vi : inputs)
    views.push_back(View{smooth(vi.mask), vi.camera});
  return views;
}

FitResult fit(std::span<const ViewInput> views, int point_count,
              const FitConfig& cfg) {
  return fit_with_checkpoint(views, point_count, cfg, "");
}

FitResult fit_with_checkpoint(std::span<const ViewInput> view_inputs,
                              int point_count, const FitConfig& cfg,
                              const std::string& checkpoint_path) {
  if (point_count < 1) throw std::invalid_argument("fit: J must be >= 1");
  if (view_inputs.empty()) throw EmptyViewsError("fit: no views");
  const std::vector<View> views = prepare_views(view_inputs);

  PointCloud cloud = initial_cloud(point_count, cfg);
  AdamState adam;
  adam.m.assign(point_count, Vec3{});
  adam.v.assign(point_count, Vec3{});
  return run_adam(views, std::move(cloud), std::move(adam), cfg, cfg.steps,
                  checkpoint_path);
}

FitResult resume(const std::string& checkpoint_path,
                 std::span<const ViewInput> view_inputs, int additional_steps,
                 const std::string& new_checkpoint_path) {
  if (additional_steps < 0)
    throw std::invalid_argument("resume: additional steps must be >= 0");
  if (view_inputs.empty()) throw EmptyViewsError("resume: no views");

  PointCloud cloud;
  AdamState adam;
  FitConfig cfg;
  read_checkpoint(checkpoint_path, cloud, adam, cfg);
  const std::vector<View> views = prepare_views(view_inputs);
  return run_adam(views, std::move(cloud), std::move(adam), cfg,
                  additional_steps, new_checkpoint_path);
}

void save_trace_csv(const FitTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "step,total,unary,pairwise,fg_fraction,ms\n";
  out.precision(12);
  for (const auto& r : trace.records)
    out << r.step << "," << r.total << "," << r.unary << "," << r.pairwise
        << "," << r.fg_fraction << "," << r.ms << "\n";
}

nlohmann::json fit_config_to_json(const FitConfig& cfg) {
  nlohmann::json j;
  j["steps"] = cfg.steps;
  j["learning_rate"] = cfg.learning_rate;
  j["adam_beta1"] = cfg.adam_beta1;
  j["adam_beta2"] = cfg.adam_beta2;
  j["adam_eps"] = cfg.adam_eps;
  j["seed"] = cfg.seed;
  j["init"] = cfg.init == InitKind::kUniformCube  ? "uniform_cube"
              : cfg.init == InitKind::kGaussian   ? "gaussian"
                                                  : "from_file";
  j["init_half_extent"] = cfg.init_half_extent;
  j["init_stddev"] = cfg.init_stddev;
  j["init_file"] = cfg.init_file;
  j["log_every"] = cfg.log_every;
  j["loss"] = loss_config_to_json(cfg.loss);
  return j;
}

FitConfig fit_config_from_json(const nlohmann::json& j) {
  FitConfig cfg;
  cfg.steps = j.value("steps", cfg.steps);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.adam_beta1 = j.value("adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = j.value("adam_beta2", cfg.adam_beta2);
  cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
  cfg.seed = j.value("seed", cfg.seed);
  const std::string init = j.value("init", std::string("uniform_cube"));
  cfg.init = init == "gaussian"    ? InitKind::kGaussian
             : init == "from_file" ? InitKind::kFromFile
                                   : InitKind::kUniformCube;
  cfg.init_half_extent = j.value("init_half_extent", cfg.init_half_extent);
  cfg.init_stddev = j.value("init_stddev", cfg.init_stddev);
  cfg.init_file = j.value("init_file", cfg.init_file);
  cfg.log_every = j.value("log_every", cfg.log_every);
  if (j.contains("loss")) cfg.loss = loss_config_from_json(j["loss"]);
  return cfg;
}

}  // namespace drwr
