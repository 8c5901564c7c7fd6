#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "ibvs/interaction.hpp"

namespace ibvs {

enum class DepthPolicy { True, Constant, Goal };
enum class Reduction { Full6, Reduced4 };
enum class StalePolicy { HoldLast, DropPair };

template <typename Scalar>
struct ControllerConfig {
  Scalar lambda = Scalar(0.1);  // 1/s
  DepthPolicy depth_policy = DepthPolicy::True;
  Scalar constant_depth = Scalar(1);  // m, used by DepthPolicy::Constant
  Reduction reduction = Reduction::Reduced4;
  StalePolicy stale_policy = StalePolicy::HoldLast;
  Scalar max_linear = Scalar(1);   // m/s
  Scalar max_angular = Scalar(1);  // rad/s
  Scalar sigma_min_tol = Scalar(kDefaultSigmaMinTol);

  void validate() const {
    if (!(lambda > 0)) throw ConfigError("controller: lambda must be > 0");
    if (!(max_linear > 0) || !(max_angular > 0)) throw ConfigError("controller: twist limits must be > 0");
    if (depth_policy == DepthPolicy::Constant && !(constant_depth > 0)) {
      throw ConfigError("controller: constant depth must be > 0");
    }
    if (!(sigma_min_tol >= 0)) throw ConfigError("controller: sigma_min_tol must be >= 0");
  }
};

/// (v_x, v_y, v_z, w_z): the channels an underactuated quadrotor can command.
template <typename Scalar>
struct ReducedTwist {
  Vector4<Scalar> coeffs = Vector4<Scalar>::Zero();

  ReducedTwist() = default;
  explicit ReducedTwist(const Vector4<Scalar>& c) : coeffs(c) {}
  static ReducedTwist from_twist(const Twist<Scalar>& t) {
    return ReducedTwist(Vector4<Scalar>(t[0], t[1], t[2], t[5]));
  }
  Twist<Scalar> to_twist() const {
    Vector6<Scalar> c;
    c << coeffs(0), coeffs(1), coeffs(2), Scalar(0), Scalar(0), coeffs(3);
    return Twist<Scalar>(c);
  }
};

/// Optics-to-body rotation for a forward-looking camera on an x-forward,
/// z-up body: optical z = body x, optical x = -body y, optical y = -body z.
template <typename Scalar>
Rotation<Scalar> forward_camera_mount() {
  Matrix3<Scalar> r;
  r << 0, 0, 1,
       -1, 0, 0,
       0, -1, 0;
  return Rotation<Scalar>(r);
}

/// Componentwise clamp; never flips a component's sign.
template <typename Scalar>
Twist<Scalar> saturate(const Twist<Scalar>& t, Scalar max_linear, Scalar max_angular) {
  Twist<Scalar> out = t;
  for (int i = 0; i < 3; ++i) out[i] = std::clamp(t[i], -max_linear, max_linear);
  for (int i = 3; i < 6; ++i) out[i] = std::clamp(t[i], -max_angular, max_angular);
  return out;
}

template <typename Scalar>
struct ControlSolution {
  Twist<Scalar> twist;
  Eigen::Index rank = 0;
  bool truncated = false;
};

/// lambda * L^+ * e, before saturation.
template <typename Scalar>
ControlSolution<Scalar> solve_camera_twist(const std::type_identity_t<VectorX<Scalar>>& e, const InteractionMatrix<Scalar>& l,
                                           const ControllerConfig<Scalar>& cfg) {
  if (e.size() != l.matrix().rows()) {
    throw Error("camera_twist: error has " + std::to_string(e.size()) + " entries, L has " +
                std::to_string(l.matrix().rows()) + " rows");
  }
  const PseudoInverse<Scalar> pinv = pseudo_inverse(l, cfg.sigma_min_tol);
  ControlSolution<Scalar> out;
  out.twist = Twist<Scalar>(Vector6<Scalar>(cfg.lambda * (pinv.matrix * e)));
  out.rank = pinv.rank;
  out.truncated = pinv.truncated;
  return out;
}

template <typename Scalar>
Twist<Scalar> camera_twist(const std::type_identity_t<VectorX<Scalar>>& e, const InteractionMatrix<Scalar>& l,
                           const ControllerConfig<Scalar>& cfg) {
  return saturate(solve_camera_twist(e, l, cfg).twist, cfg.max_linear, cfg.max_angular);
}

/// Camera twist re-expressed in the body frame; Reduced4 then zeroes w_x, w_y.
template <typename Scalar>
Twist<Scalar> body_twist(const Twist<Scalar>& camera, const Pose<Scalar>& body_T_camera,
                         Reduction reduction = Reduction::Full6) {
  Twist<Scalar> b = transform_twist(body_T_camera, camera);
  if (reduction == Reduction::Reduced4) {
    b[3] = Scalar(0);
    b[4] = Scalar(0);
  }
  return b;
}

/// Rotation taking real-camera coordinates to the virtual camera, which
/// shares the real camera's position and yaw but has zero body roll and pitch.
template <typename Scalar>
Matrix3<Scalar> virtual_camera_rotation(Scalar roll, Scalar pitch,
                                        const Rotation<Scalar>& mount = forward_camera_mount<Scalar>()) {
  if (!(std::abs(pitch) < Scalar(M_PI / 2))) {
    throw DegeneratePitchError("virtual_camera_correction: |pitch| must be < pi/2");
  }
  const Matrix3<Scalar> tilt = (Rotation<Scalar>::about_y(pitch) * Rotation<Scalar>::about_x(roll)).matrix();
  return mount.matrix().transpose() * tilt * mount.matrix();
}

/// Re-images valid features on the virtual camera's image plane.
template <typename Scalar>
FeatureSet<Scalar> virtual_camera_correction(const FeatureSet<Scalar>& features, Scalar roll, Scalar pitch,
                                             const CameraIntrinsics<Scalar>& k,
                                             const Rotation<Scalar>& mount = forward_camera_mount<Scalar>()) {
  const Matrix3<Scalar> m = virtual_camera_rotation(roll, pitch, mount);
  FeatureSet<Scalar> out = features;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!features.valid[i]) continue;
    const NormalizedPoint<Scalar> n = normalize(features.points[i], k);
    const Vector3<Scalar> ray = m * Vector3<Scalar>(n.x, n.y, Scalar(1));
    if (!(ray.z() > Scalar(kMinFrontDepth))) {
      throw OutOfField("virtual_camera_correction: feature " + std::to_string(i + 1) +
                       " falls behind the virtual image plane");
    }
    out.points[i] = denormalize(NormalizedPoint<Scalar>{ray.x() / ray.z(), ray.y() / ray.z()}, k);
  }
  return out;
}

template <typename Scalar>
struct BodyCommand {
  Twist<Scalar> camera;  // in the camera frame
  Twist<Scalar> body;    // saturated; w_x = w_y = 0 under Reduced4
  Eigen::Index rank = 0;
  bool truncated = false;
};

/// Full control step from feature error to the saturated body-frame command.
///
/// Full6 solves the 6-DOF law in the camera frame and maps it through the
/// adjoint. Reduced4 moves L into body coordinates (L * Adj(cTb)), drops the
/// w_x, w_y columns and solves the least-squares problem over the four
/// commandable channels.
template <typename Scalar>
BodyCommand<Scalar> compute_body_command(const std::type_identity_t<VectorX<Scalar>>& e, const InteractionMatrix<Scalar>& l,
                                         const Pose<Scalar>& body_T_camera,
                                         const ControllerConfig<Scalar>& cfg) {
  BodyCommand<Scalar> out;
  if (cfg.reduction == Reduction::Full6) {
    const ControlSolution<Scalar> sol = solve_camera_twist(e, l, cfg);
    out.camera = saturate(sol.twist, cfg.max_linear, cfg.max_angular);
    out.body = saturate(body_twist(out.camera, body_T_camera), cfg.max_linear, cfg.max_angular);
    out.rank = sol.rank;
    out.truncated = sol.truncated;
    return out;
  }
  if (e.size() != l.matrix().rows()) {
    throw Error("compute_body_command: error/L size mismatch");
  }
  const Matrix6<Scalar> camera_from_body = adjoint(body_T_camera.inverse());
  const MatrixX<Scalar> l4 = reduce_to_4dof(l.matrix() * camera_from_body);
  const PseudoInverse<Scalar> pinv = pseudo_inverse(l4, cfg.sigma_min_tol);
  const Vector4<Scalar> v4 = cfg.lambda * (pinv.matrix * e);
  out.body = saturate(ReducedTwist<Scalar>(v4).to_twist(), cfg.max_linear, cfg.max_angular);
  out.camera = Twist<Scalar>(Vector6<Scalar>(camera_from_body * out.body.coeffs));
  out.rank = pinv.rank;
  out.truncated = pinv.truncated;
  return out;
}

using ControllerConfigd = ControllerConfig<double>;

}  // namespace ibvs
