#pragma once

#include "ibvs/servo.hpp"

namespace ibvs {

inline constexpr double kGravity = 9.80665;

/// Kinematic quadrotor. Roll and pitch are not integrated; they are reported
/// from a quasi-static tilt model of the current body acceleration.
struct UavState {
  Vector3<double> position = Vector3<double>::Zero();  // world, m
  double yaw = 0;
  double roll = 0;
  double pitch = 0;
  Vector4<double> velocity = Vector4<double>::Zero();  // body (v_x, v_y, v_z, w_z)

  Rotationd attitude() const { return euler_zyx_to_rotation(EulerZYXd{roll, pitch, yaw}); }
  Posed body_pose() const { return Posed(attitude(), position); }
  /// Same position and yaw with roll = pitch = 0.
  Posed level_pose() const { return Posed(Rotationd::about_z(yaw), position); }
};

struct PlantConfig {
  double tau = 0.2;         // actuator lag time constant, s; 0 = ideal tracking
  double dt = 1.0 / 120.0;  // integration step, s
  Posed body_T_camera = Posed(forward_camera_mount<double>(), Vector3<double>::Zero());
  bool tilt_model = true;
  double max_tilt = 20.0 * M_PI / 180.0;  // rad

  // Bebop 2 inertial data; the kinematic model does not use them.
  double mass = 0.399;                                       // kg
  Vector3<double> inertia_diag = Vector3<double>(0.01152, 0.01152, 0.0218);  // kg m^2

  void validate() const;
};

/// One explicit-Euler step under a zero-order-held command.
UavState step(const UavState& state, const ReducedTwist<double>& cmd, const PlantConfig& cfg);

/// World pose of the camera: body pose composed with the mounting transform.
Posed camera_pose(const UavState& state, const PlantConfig& cfg);

/// Camera pose with body roll and pitch zeroed.
Posed virtual_camera_pose(const UavState& state, const PlantConfig& cfg);

}  // namespace ibvs
