#include "ibvs/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

namespace ibvs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CapturedFrame {
  Detection detection;
  double roll = 0;
  double pitch = 0;
  std::array<double, kCornerCount> virtual_depths{};  // true depths seen by the virtual camera
};

struct HeldFeature {
  NormalizedPointd point;
  double depth = 0;
};

std::array<double, kCornerCount> depths_in(const Posed& camera, const TargetModel& target) {
  std::array<double, kCornerCount> z{};
  const auto corners = target.world_corners();
  for (int i = 0; i < kCornerCount; ++i) {
    z[i] = (camera.rotation.matrix().transpose() * (corners[i] - camera.translation)).z();
  }
  return z;
}

std::optional<Posed> goal_camera(const ScenarioConfig& c) {
  if (const auto* g = std::get_if<GoalCameraPose>(&c.desired)) {
    return Posed(Rotationd::about_z(g->yaw), g->position) * c.plant.body_T_camera;
  }
  return std::nullopt;
}

/// Derives independent generator seeds for the detector and the latency model.
std::array<std::uint64_t, 2> stream_seeds(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x1b5u};
  std::array<std::uint32_t, 4> words{};
  seq.generate(words.begin(), words.end());
  return {(std::uint64_t(words[0]) << 32) | words[1], (std::uint64_t(words[2]) << 32) | words[3]};
}

}  // namespace

void ScenarioConfig::finalize() {
  if (!(control_rate > 0) || plant_substeps < 1) {
    throw ConfigError("timing: control_rate must be > 0 and plant_substeps >= 1");
  }
  plant.dt = 1.0 / (control_rate * plant_substeps);
  latency.frame_period = 1.0 / control_rate;
  validate();
}

void ScenarioConfig::validate() const {
  if (!(duration > 0)) throw ConfigError("duration must be > 0");
  if (!(warmup >= 0) || !(lost_grace >= 0)) throw ConfigError("warmup and lost_grace must be >= 0");
  if (!(convergence_fraction > 0) || !(convergence_hold >= 0)) {
    throw ConfigError("summary: convergence_fraction must be > 0 and convergence_hold >= 0");
  }
  if (!camera.valid()) throw ConfigError("camera: invalid intrinsics");
  if (!initial_position.allFinite() || !target_center.allFinite()) throw ConfigError("poses must be finite");
  controller.validate();
  plant.validate();
  perturbation.validate();
  latency.validate();
  if (controller.depth_policy == DepthPolicy::Goal && !std::holds_alternative<GoalCameraPose>(desired)) {
    throw ConfigError("controller: goal depth policy needs a goal camera pose as desired-feature source");
  }
  (void)target();
}

TargetModel ScenarioConfig::target() const {
  const Posed pose(Rotationd::about_z(target_facing_yaw) * forward_camera_mount<double>(), target_center);
  return TargetModel::rectangle(target_width, target_height, pose);
}

long ScenarioConfig::tick_count() const { return std::lround(duration * control_rate); }

SummaryParams summary_params(const ScenarioConfig& config) {
  return {config.convergence_fraction, config.convergence_hold, config.target().world_center(),
          config.plant.body_T_camera.translation};
}

FeatureSetd desired_features(const ScenarioConfig& config) {
  if (const auto* px = std::get_if<ExplicitPixels>(&config.desired)) {
    return FeatureSetd(std::vector<PixelPointd>(px->pixels.begin(), px->pixels.end()));
  }
  const Posed cam = *goal_camera(config);
  std::vector<PixelPointd> pts;
  try {
    for (const auto& c : config.target().world_corners()) pts.push_back(project(c, cam, config.camera).pixel);
  } catch (const ProjectionBehindCamera&) {
    throw ConfigError("desired features: target is behind the goal camera");
  }
  return FeatureSetd(std::move(pts));
}

RunSummary summarize(const std::vector<StepRecord>& records, const SummaryParams& params) {
  RunSummary s;
  s.record_count = records.size();
  if (records.empty()) return s;

  s.initial_error = kNaN;
  for (const auto& r : records) {
    if (std::isfinite(r.e_norm)) {
      s.initial_error = r.e_norm;
      break;
    }
  }

  const double threshold = params.convergence_fraction * s.initial_error;
  // A record whose e_norm is at or above threshold (or NaN) breaks a streak.
  std::size_t streak_start = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool below = records[i].e_norm < threshold;
    if (!below) {
      streak_start = records.size();
      continue;
    }
    if (streak_start == records.size()) streak_start = i;
    if (records[i].t - records[streak_start].t >= params.convergence_hold - kTimeEps) {
      s.convergence_time = records[streak_start].t;
      break;
    }
  }

  const std::size_t tail = std::max<std::size_t>(1, (records.size() + 9) / 10);
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t i = records.size() - tail; i < records.size(); ++i) {
    if (std::isfinite(records[i].e_norm)) {
      sum += records[i].e_norm;
      ++n;
    }
  }
  s.steady_state_error = n > 0 ? sum / double(n) : kNaN;

  s.peak_cond = kNaN;
  s.min_target_distance = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (!std::isnan(r.cond_l) && !(r.cond_l <= s.peak_cond)) s.peak_cond = r.cond_l;
    const Vector3<double> cam = r.position + euler_zyx_to_rotation(r.euler) * params.camera_offset;
    s.min_target_distance = std::min(s.min_target_distance, (cam - params.target_center).norm());
  }
  return s;
}

RunResult run(ScenarioConfig config) {
  config.finalize();
  const auto seeds = stream_seeds(config.seed);
  config.perturbation.seed = seeds[0];

  const TargetModel target = config.target();
  const CameraIntrinsicsd& k = config.camera;
  const ControllerConfigd& ctl = config.controller;
  const PlantConfig& plant = config.plant;

  const FeatureSetd desired = desired_features(config);
  const VectorX<double> desired_n = normalized_stack(desired, k);
  std::array<double, kCornerCount> goal_depths{};
  if (const auto cam = goal_camera(config)) goal_depths = depths_in(*cam, target);

  KeypointProvider provider(target, k, config.perturbation);
  DelayPipeline<CapturedFrame> pipeline(config.latency, seeds[1]);

  UavState state;
  state.position = config.initial_position;
  state.yaw = config.initial_yaw;

  std::optional<CapturedFrame> current;
  std::array<std::optional<HeldFeature>, kCornerCount> held;
  double last_seen = -config.warmup;

  RunResult result;
  const long ticks = config.tick_count();
  const long warmup_ticks = std::lround(config.warmup * config.control_rate);
  result.records.reserve(static_cast<std::size_t>(ticks));
  result.diagnostics.reserve(static_cast<std::size_t>(ticks));
  bool lost = false;

  for (long n = -warmup_ticks; n < ticks; ++n) {
    const double t = double(n) / config.control_rate;

    // Capture.
    try {
      CapturedFrame frame;
      frame.detection = provider.detect(camera_pose(state, plant), t);
      frame.roll = state.roll;
      frame.pitch = state.pitch;
      frame.virtual_depths = depths_in(virtual_camera_pose(state, plant), target);
      pipeline.submit(std::move(frame), t);
      last_seen = t;
    } catch (const TargetLost&) {
      if (t - last_seen > config.lost_grace + kTimeEps) lost = true;
    }

    if (auto fresh = pipeline.poll(t)) {
      current = std::move(fresh);
      const Detection& d = current->detection;
      const FeatureSetd corrected = virtual_camera_correction(d.features, current->roll, current->pitch, k,
                                                              plant.body_T_camera.rotation);
      for (int i = 0; i < kCornerCount; ++i) {
        if (!d.features.valid[i]) {
          if (ctl.stale_policy == StalePolicy::DropPair) held[i].reset();
          continue;
        }
        double z = current->virtual_depths[i];
        if (ctl.depth_policy == DepthPolicy::Constant) z = ctl.constant_depth;
        if (ctl.depth_policy == DepthPolicy::Goal) z = goal_depths[i];
        if (!(z > 0) || !std::isfinite(z)) {
          held[i].reset();
          continue;
        }
        held[i] = HeldFeature{normalize(corrected.points[i], k), z};
      }
    }

    if (n < 0) continue;
    if (lost) {
      result.status = RunStatus::LostTarget;
      break;
    }

    // Control.
    StepRecord rec;
    StepDiagnostics diag;
    rec.t = t;
    rec.position = state.position;
    rec.euler = EulerZYXd{state.roll, state.pitch, state.yaw};
    rec.e_norm = kNaN;
    rec.cond_l = kNaN;
    rec.det_age = kNaN;
    if (current) {
      for (int i = 0; i < kCornerCount; ++i) rec.valid[i] = current->detection.features.valid[i];
      rec.det_age = t - current->detection.capture_time;
    }

    std::vector<PixelPointd> used_pts;
    std::vector<int> used_idx;
    for (int i = 0; i < kCornerCount; ++i) {
      if (held[i]) {
        used_idx.push_back(i);
        used_pts.push_back(denormalize(held[i]->point, k));
      }
    }
    if (!used_idx.empty()) {
      const FeatureSetd used(used_pts);
      VectorX<double> z(used_idx.size());
      VectorX<double> e(2 * used_idx.size());
      for (std::size_t j = 0; j < used_idx.size(); ++j) {
        const int i = used_idx[j];
        z(j) = held[i]->depth;
        e(2 * j) = desired_n(2 * i) - held[i]->point.x;
        e(2 * j + 1) = desired_n(2 * i + 1) - held[i]->point.y;
      }
      const InteractionMatrixd l = stack(used, z, k);
      rec.e_norm = e.norm();
      rec.cond_l = l.condition();
      diag.features_used = int(used_idx.size());
      try {
        const BodyCommand<double> cmd = compute_body_command(e, l, plant.body_T_camera, ctl);
        rec.twist = cmd.body;
        diag.truncated = cmd.truncated;
      } catch (const SingularInteraction&) {
        diag.truncated = true;
      }
    }

    // Ground-truth error on the virtual image plane.
    {
      const Posed vcam = virtual_camera_pose(state, plant);
      const auto corners = target.world_corners();
      double sq = 0;
      for (int i = 0; i < kCornerCount; ++i) {
        const Vector3<double> pc = vcam.rotation.matrix().transpose() * (corners[i] - vcam.translation);
        if (!(pc.z() > kMinFrontDepth)) {
          sq = kNaN;
          break;
        }
        sq += std::pow(desired_n(2 * i) - pc.x() / pc.z(), 2) + std::pow(desired_n(2 * i + 1) - pc.y() / pc.z(), 2);
      }
      diag.true_e_norm = std::sqrt(sq);
    }

    result.records.push_back(rec);
    result.diagnostics.push_back(diag);

    const ReducedTwist<double> cmd4 = ReducedTwist<double>::from_twist(rec.twist);
    for (int s = 0; s < config.plant_substeps; ++s) state = step(state, cmd4, plant);
  }

  result.summary = summarize(result.records, summary_params(config));
  if (result.status != RunStatus::LostTarget) {
    result.status = result.summary.convergence_time ? RunStatus::Converged : RunStatus::NotConverged;
  }
  return result;
}

std::vector<RunResult> run_batch(const ScenarioConfig& config, const std::vector<std::uint64_t>& seeds,
                                 unsigned threads) {
  std::vector<RunResult> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      ScenarioConfig c = config;
      c.seed = seeds[i];
      try {
        results[i] = run(std::move(c));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace ibvs
