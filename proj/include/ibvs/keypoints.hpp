#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <variant>

#include "ibvs/interaction.hpp"

namespace ibvs {

using Rng = std::mt19937_64;

inline constexpr int kCornerCount = 4;

/// Planar rectangular target. Corners in the target frame are ordered
/// top-left, top-right, bottom-right, bottom-left, with target x to the right,
/// y down and z pointing away from a viewer that sees it upright.
struct TargetModel {
  std::array<Vector3<double>, kCornerCount> corners;
  Posed pose;  // target frame -> world

  static TargetModel rectangle(double width, double height, const Posed& pose);

  std::array<Vector3<double>, kCornerCount> world_corners() const;
  Vector3<double> world_center() const;
  /// Max distance of any corner from the plane through the first three.
  double planarity_error() const;
};

namespace perturbation {
struct Ideal {};
struct Occlusion {
  std::array<double, kCornerCount> dropout_prob{};
};
/// Additive Gaussian pixel noise plus occasional per-corner misdetection.
struct Illumination {
  double pixel_noise_sigma = 0;  // px
  double misdetect_prob = 0;
};
/// With outlier_prob per frame, one corner is replaced by a uniform pixel.
struct Clutter {
  double outlier_prob = 0;
};
/// Constant per-corner pixel offset.
struct BackgroundBias {
  std::array<PixelPointd, kCornerCount> offset{};
};
}  // namespace perturbation

using PerturbationVariant = std::variant<perturbation::Ideal, perturbation::Occlusion,
                                         perturbation::Illumination, perturbation::Clutter,
                                         perturbation::BackgroundBias>;

struct PerturbationModel {
  PerturbationVariant variant = perturbation::Ideal{};
  std::uint64_t seed = 0;

  void validate() const;
  const char* kind() const;
};

/// Inference uniform on [inference_min, inference_max]; preprocessing normal
/// (mean, sigma) clamped below at preprocess_min. Seconds.
struct LatencyModel {
  double inference_min = 0.060;
  double inference_max = 0.130;
  double preprocess_mean = 0.090;
  double preprocess_sigma = 0.010;
  double preprocess_min = 0.050;
  double frame_period = 1.0 / 30.0;

  static LatencyModel zero();
  static LatencyModel fixed(double delay);

  void validate() const;
  double sample(Rng& rng) const;
};

struct Detection {
  FeatureSetd features;       // as reported by the detector
  VectorX<double> depths;     // true camera-frame depths; NaN when behind camera
  std::array<bool, kCornerCount> in_field{};  // ground-truth visibility
  double capture_time = 0;
};

/// Projects the target corners and degrades them per `model`.
/// Throws TargetLost when no corner projects inside the image.
Detection detect(const Posed& camera_pose, const TargetModel& target, const CameraIntrinsicsd& k,
                 const PerturbationModel& model, Rng& rng);

/// Seeded detector; one per simulation run.
class KeypointProvider {
 public:
  KeypointProvider(TargetModel target, CameraIntrinsicsd k, PerturbationModel model);

  Detection detect(const Posed& camera_pose, double capture_time);

  const TargetModel& target() const { return target_; }
  const PerturbationModel& model() const { return model_; }

 private:
  TargetModel target_;
  CameraIntrinsicsd k_;
  PerturbationModel model_;
  Rng rng_;
};

inline constexpr double kTimeEps = 1e-9;

/// Availability time of a frame captured at `t_frame`, without FIFO ordering.
double latency_schedule(const LatencyModel& model, double t_frame, Rng& rng);

/// FIFO of in-flight frames. Availability times never decrease with capture time.
template <typename Payload>
class DelayPipeline {
 public:
  DelayPipeline(LatencyModel model, std::uint64_t seed) : model_(model), rng_(seed) { model_.validate(); }

  /// Returns the availability time assigned to `p`.
  double submit(Payload p, double capture_time) {
    const double available = std::max(latency_schedule(model_, capture_time, rng_), last_available_);
    last_available_ = available;
    queue_.push_back({available, std::move(p)});
    return available;
  }

  /// Newest payload available at time t, if any arrived since the last call.
  std::optional<Payload> poll(double t) {
    std::optional<Payload> latest;
    while (!queue_.empty() && queue_.front().available_at <= t + kTimeEps) {
      latest = std::move(queue_.front().payload);
      queue_.pop_front();
    }
    return latest;
  }

  std::size_t in_flight() const { return queue_.size(); }

 private:
  struct Pending {
    double available_at;
    Payload payload;
  };
  LatencyModel model_;
  Rng rng_;
  double last_available_ = -std::numeric_limits<double>::infinity();
  std::deque<Pending> queue_;
};

using DetectionPipeline = DelayPipeline<Detection>;

}  // namespace ibvs
