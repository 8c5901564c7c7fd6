#include "ibvs/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ibvs {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string("perturbation: ") + what + " must be in [0, 1], got " + std::to_string(p));
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

TargetModel TargetModel::rectangle(double width, double height, const Posed& pose) {
  if (!(width > 0) || !(height > 0)) throw ConfigError("target: width and height must be > 0");
  TargetModel t;
  const double hw = width / 2;
  const double hh = height / 2;
  t.corners = {Vector3<double>(-hw, -hh, 0), Vector3<double>(hw, -hh, 0), Vector3<double>(hw, hh, 0),
               Vector3<double>(-hw, hh, 0)};
  t.pose = pose;
  return t;
}

std::array<Vector3<double>, kCornerCount> TargetModel::world_corners() const {
  std::array<Vector3<double>, kCornerCount> w;
  for (int i = 0; i < kCornerCount; ++i) w[i] = pose * corners[i];
  return w;
}

Vector3<double> TargetModel::world_center() const {
  Vector3<double> c = Vector3<double>::Zero();
  for (const auto& p : world_corners()) c += p;
  return c / kCornerCount;
}

double TargetModel::planarity_error() const {
  const Vector3<double> n = (corners[1] - corners[0]).cross(corners[2] - corners[0]);
  if (n.norm() == 0) return std::numeric_limits<double>::infinity();
  return std::abs(n.normalized().dot(corners[3] - corners[0]));
}

void PerturbationModel::validate() const {
  std::visit(overloaded{
                 [](const perturbation::Ideal&) {},
                 [](const perturbation::Occlusion& o) {
                   for (double p : o.dropout_prob) check_probability(p, "dropout_prob");
                 },
                 [](const perturbation::Illumination& m) {
                   if (!(m.pixel_noise_sigma >= 0)) throw ConfigError("perturbation: pixel_noise_sigma must be >= 0");
                   check_probability(m.misdetect_prob, "misdetect_prob");
                 },
                 [](const perturbation::Clutter& c) { check_probability(c.outlier_prob, "outlier_prob"); },
                 [](const perturbation::BackgroundBias& b) {
                   for (const auto& o : b.offset) {
                     if (!std::isfinite(o.u) || !std::isfinite(o.v)) throw ConfigError("perturbation: bias must be finite");
                   }
                 },
             },
             variant);
}

const char* PerturbationModel::kind() const {
  return std::visit(overloaded{
                        [](const perturbation::Ideal&) { return "ideal"; },
                        [](const perturbation::Occlusion&) { return "occlusion"; },
                        [](const perturbation::Illumination&) { return "illumination"; },
                        [](const perturbation::Clutter&) { return "clutter"; },
                        [](const perturbation::BackgroundBias&) { return "background"; },
                    },
                    variant);
}

LatencyModel LatencyModel::zero() {
  LatencyModel m;
  m.inference_min = m.inference_max = 0;
  m.preprocess_mean = m.preprocess_sigma = m.preprocess_min = 0;
  return m;
}

LatencyModel LatencyModel::fixed(double delay) {
  LatencyModel m = zero();
  m.inference_min = m.inference_max = delay;
  return m;
}

void LatencyModel::validate() const {
  if (!(inference_min >= 0) || !(inference_max >= inference_min)) {
    throw ConfigError("latency: need 0 <= inference_min <= inference_max");
  }
  if (!(preprocess_sigma >= 0) || !(preprocess_min >= 0) || !std::isfinite(preprocess_mean)) {
    throw ConfigError("latency: preprocessing parameters must be finite and non-negative");
  }
  if (!(frame_period > 0)) throw ConfigError("latency: frame_period must be > 0");
}

double LatencyModel::sample(Rng& rng) const {
  double inference = inference_min;
  if (inference_max > inference_min) {
    inference = std::uniform_real_distribution<double>(inference_min, inference_max)(rng);
  }
  double pre = preprocess_mean;
  if (preprocess_sigma > 0) pre = std::normal_distribution<double>(preprocess_mean, preprocess_sigma)(rng);
  pre = std::max(pre, preprocess_min);
  return inference + pre;
}

Detection detect(const Posed& camera_pose, const TargetModel& target, const CameraIntrinsicsd& k,
                 const PerturbationModel& model, Rng& rng) {
  Detection d;
  d.features.points.resize(kCornerCount);
  d.features.valid.assign(kCornerCount, false);
  d.depths = VectorX<double>::Constant(kCornerCount, std::numeric_limits<double>::quiet_NaN());

  const auto corners = target.world_corners();
  bool any_in_field = false;
  for (int i = 0; i < kCornerCount; ++i) {
    try {
      const Projection<double> p = project(corners[i], camera_pose, k);
      d.features.points[i] = p.pixel;
      d.depths(i) = p.depth;
      d.in_field[i] = p.in_field;
    } catch (const ProjectionBehindCamera&) {
      d.in_field[i] = false;
    }
    d.features.valid[i] = d.in_field[i];
    any_in_field = any_in_field || d.in_field[i];
  }
  if (!any_in_field) throw TargetLost("detect: no target corner inside the field of view");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::visit(overloaded{
                 [](const perturbation::Ideal&) {},
                 [&](const perturbation::Occlusion& o) {
                   for (int i = 0; i < kCornerCount; ++i) {
                     if (unit(rng) < o.dropout_prob[i]) d.features.valid[i] = false;
                   }
                 },
                 [&](const perturbation::Illumination& m) {
                   std::normal_distribution<double> noise(0.0, 1.0);
                   for (int i = 0; i < kCornerCount; ++i) {
                     const double du = noise(rng) * m.pixel_noise_sigma;
                     const double dv = noise(rng) * m.pixel_noise_sigma;
                     const bool miss = unit(rng) < m.misdetect_prob;
                     if (!d.features.valid[i]) continue;
                     d.features.points[i].u += du;
                     d.features.points[i].v += dv;
                     if (miss) d.features.valid[i] = false;
                   }
                 },
                 [&](const perturbation::Clutter& c) {
                   if (!(unit(rng) < c.outlier_prob)) return;
                   const int corner = std::uniform_int_distribution<int>(0, kCornerCount - 1)(rng);
                   d.features.points[corner] = {unit(rng) * k.width, unit(rng) * k.height};
                   d.features.valid[corner] = true;
                 },
                 [&](const perturbation::BackgroundBias& b) {
                   for (int i = 0; i < kCornerCount; ++i) {
                     if (!d.features.valid[i]) continue;
                     d.features.points[i].u += b.offset[i].u;
                     d.features.points[i].v += b.offset[i].v;
                   }
                 },
             },
             model.variant);
  return d;
}

KeypointProvider::KeypointProvider(TargetModel target, CameraIntrinsicsd k, PerturbationModel model)
    : target_(std::move(target)), k_(k), model_(std::move(model)), rng_(model_.seed) {
  model_.validate();
}

Detection KeypointProvider::detect(const Posed& camera_pose, double capture_time) {
  Detection d = ibvs::detect(camera_pose, target_, k_, model_, rng_);
  d.capture_time = capture_time;
  return d;
}

double latency_schedule(const LatencyModel& model, double t_frame, Rng& rng) {
  return t_frame + model.sample(rng);
}

}  // namespace ibvs
