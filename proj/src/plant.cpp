#include "ibvs/plant.hpp"

#include <algorithm>
#include <cmath>

namespace ibvs {

void PlantConfig::validate() const {
  if (!(dt > 0)) throw ConfigError("plant: dt must be > 0");
  if (!(tau >= 0)) throw ConfigError("plant: tau must be >= 0");
  if (!(max_tilt >= 0) || !(max_tilt < M_PI / 2)) throw ConfigError("plant: max_tilt must be in [0, 90) deg");
  if (body_T_camera.rotation.orthonormality_error() > 1e-9) {
    throw ConfigError("plant: camera mount rotation is not orthonormal");
  }
}

UavState step(const UavState& state, const ReducedTwist<double>& cmd, const PlantConfig& cfg) {
  UavState next = state;
  const double alpha = cfg.tau > 0 ? std::min(cfg.dt / cfg.tau, 1.0) : 1.0;
  next.velocity = state.velocity + alpha * (cmd.coeffs - state.velocity);

  const Vector3<double> v_world = Rotationd::about_z(state.yaw) * Vector3<double>(next.velocity.head<3>());
  next.position = state.position + cfg.dt * v_world;
  next.yaw = state.yaw + cfg.dt * next.velocity(3);

  if (cfg.tilt_model) {
    const Vector4<double> accel = (next.velocity - state.velocity) / cfg.dt;
    next.pitch = std::clamp(accel(0) / kGravity, -cfg.max_tilt, cfg.max_tilt);
    next.roll = std::clamp(-accel(1) / kGravity, -cfg.max_tilt, cfg.max_tilt);
  } else {
    next.roll = next.pitch = 0;
  }
  return next;
}

Posed camera_pose(const UavState& state, const PlantConfig& cfg) { return state.body_pose() * cfg.body_T_camera; }

Posed virtual_camera_pose(const UavState& state, const PlantConfig& cfg) {
  return state.level_pose() * cfg.body_T_camera;
}

}  // namespace ibvs
