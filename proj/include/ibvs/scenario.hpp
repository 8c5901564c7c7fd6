#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ibvs/keypoints.hpp"
#include "ibvs/plant.hpp"

namespace ibvs {

/// Desired features rendered by projecting the target from a goal pose.
struct GoalCameraPose {
  Vector3<double> position = Vector3<double>(0.0, -0.8, 1.0);  // body, world frame
  double yaw = M_PI / 2;
};

/// Desired features given directly, one pixel per corner.
struct ExplicitPixels {
  std::array<PixelPointd, kCornerCount> pixels{};
};

using DesiredSource = std::variant<GoalCameraPose, ExplicitPixels>;

struct ScenarioConfig {
  Vector3<double> initial_position = Vector3<double>(-1.0, -2.5, 1.5);
  double initial_yaw = M_PI / 2;

  Vector3<double> target_center = Vector3<double>(0.0, 0.2, 1.0);
  double target_facing_yaw = M_PI / 2;  // yaw of a level camera that sees the target upright
  double target_width = 0.15;
  double target_height = 0.10;

  DesiredSource desired = GoalCameraPose{};
  CameraIntrinsicsd camera;
  ControllerConfigd controller;
  PlantConfig plant;
  PerturbationModel perturbation;
  LatencyModel latency;

  double duration = 59.0;  // s
  std::uint64_t seed = 1;
  double control_rate = 30.0;  // Hz; also the camera frame rate
  int plant_substeps = 4;      // plant steps per control tick
  double warmup = 1.0;         // s of hovering before t = 0 so the detector pipeline is primed
  double lost_grace = 1.0;     // s without any visible corner before the run is aborted

  double convergence_fraction = 0.05;  // of the initial error norm
  double convergence_hold = 2.0;       // s

  /// Applies derived fields (plant dt, frame period) and checks invariants.
  void finalize();
  void validate() const;

  TargetModel target() const;
  long tick_count() const;
};

/// One telemetry row per control tick. Angles in radians.
struct StepRecord {
  double t = 0;
  Twistd twist;  // commanded body twist
  Vector3<double> position = Vector3<double>::Zero();
  EulerZYXd euler;
  double e_norm = 0;  // measured normalized feature error
  double cond_l = 0;
  std::array<bool, kCornerCount> valid{};
  double det_age = 0;  // s since capture of the detection in use
};

/// Per-tick quantities that are not part of the telemetry file.
struct StepDiagnostics {
  double true_e_norm = 0;  // ground-truth projections vs desired features
  bool truncated = false;  // pseudo-inverse dropped a singular value
  int features_used = 0;
};

struct SummaryParams {
  double convergence_fraction = 0.05;
  double convergence_hold = 2.0;
  Vector3<double> target_center = Vector3<double>::Zero();
  Vector3<double> camera_offset = Vector3<double>::Zero();  // body-frame camera position
};

struct RunSummary {
  double initial_error = 0;
  std::optional<double> convergence_time;
  double steady_state_error = 0;  // mean e_norm over the final 10% of records
  double peak_cond = 0;
  double min_target_distance = 0;  // m, camera to target center
  std::size_t record_count = 0;

  bool operator==(const RunSummary&) const = default;
};

enum class RunStatus { Converged, NotConverged, LostTarget };

struct RunResult {
  std::vector<StepRecord> records;
  std::vector<StepDiagnostics> diagnostics;
  RunSummary summary;
  RunStatus status = RunStatus::NotConverged;
};

SummaryParams summary_params(const ScenarioConfig& config);

/// Deterministic in the records; NaN e_norm ticks are skipped.
RunSummary summarize(const std::vector<StepRecord>& records, const SummaryParams& params);

/// Desired pixels of the scenario (rendered from the goal pose when needed).
FeatureSetd desired_features(const ScenarioConfig& config);

/// Closed-loop simulation. Bit-identical output for identical configs.
RunResult run(ScenarioConfig config);

/// Independent runs of `config` with each seed, on up to `threads` workers.
/// Results are returned in seed order and do not depend on `threads`.
std::vector<RunResult> run_batch(const ScenarioConfig& config, const std::vector<std::uint64_t>& seeds,
                                 unsigned threads);

enum class TelemetryFormat { Csv, JsonLines };

inline constexpr std::array<const char*, 20> kTelemetryColumns = {
    "t",  "vx",    "vy",  "vz",     "wx",      "wy",      "wz",      "px",      "py",     "pz",
    "roll", "pitch", "yaw", "e_norm", "cond_L", "valid_1", "valid_2", "valid_3", "valid_4", "det_age"};

void emit(const std::vector<StepRecord>& records, TelemetryFormat format, std::ostream& out);
void emit(const std::vector<StepRecord>& records, TelemetryFormat format, const std::filesystem::path& path);

std::vector<StepRecord> read_telemetry(std::istream& in, TelemetryFormat format);
std::vector<StepRecord> read_telemetry(const std::filesystem::path& path, TelemetryFormat format);

}  // namespace ibvs
