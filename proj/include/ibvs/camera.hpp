#pragma once

#include <cmath>
#include <string>

#include "ibvs/se3.hpp"

namespace ibvs {

// Optical frame: z along the optical axis, x right, y down. No lens distortion.

template <typename Scalar>
struct CameraIntrinsics {
  Scalar fx = Scalar(462.137);
  Scalar fy = Scalar(462.137);
  Scalar cx = Scalar(320);
  Scalar cy = Scalar(240);
  Scalar width = Scalar(640);
  Scalar height = Scalar(480);

  bool valid() const {
    return fx > 0 && fy > 0 && cx >= 0 && cx <= width && cy >= 0 && cy <= height &&
           std::isfinite(fx) && std::isfinite(fy);
  }

  bool contains(Scalar u, Scalar v) const { return u >= 0 && u <= width && v >= 0 && v <= height; }
};

template <typename Scalar>
struct PixelPoint {
  Scalar u = 0;
  Scalar v = 0;
};

template <typename Scalar>
struct NormalizedPoint {
  Scalar x = 0;
  Scalar y = 0;
};

template <typename Scalar>
NormalizedPoint<Scalar> normalize(const PixelPoint<Scalar>& p, const CameraIntrinsics<Scalar>& k) {
  return {(p.u - k.cx) / k.fx, (p.v - k.cy) / k.fy};
}

template <typename Scalar>
PixelPoint<Scalar> denormalize(const NormalizedPoint<Scalar>& n, const CameraIntrinsics<Scalar>& k) {
  return {k.cx + k.fx * n.x, k.cy + k.fy * n.y};
}

template <typename Scalar>
struct Projection {
  PixelPoint<Scalar> pixel;
  Scalar depth = 0;
  bool in_field = true;  // false: lands outside the image bounds
};

inline constexpr double kMinFrontDepth = 1e-6;

/// Projects a world point through a camera whose world pose is `camera_pose_world`.
/// Out-of-image results are flagged, not thrown; behind-camera points throw.
template <typename Scalar>
Projection<Scalar> project(const Vector3<Scalar>& point_world, const Pose<Scalar>& camera_pose_world,
                           const CameraIntrinsics<Scalar>& k) {
  const Vector3<Scalar> pc =
      camera_pose_world.rotation.matrix().transpose() * (point_world - camera_pose_world.translation);
  if (!(pc.z() > Scalar(kMinFrontDepth))) {
    throw ProjectionBehindCamera("project: point depth " + std::to_string(double(pc.z())) +
                                 " m is not in front of the camera");
  }
  Projection<Scalar> out;
  out.depth = pc.z();
  out.pixel = denormalize(NormalizedPoint<Scalar>{pc.x() / pc.z(), pc.y() / pc.z()}, k);
  out.in_field = k.contains(out.pixel.u, out.pixel.v);
  return out;
}

using CameraIntrinsicsd = CameraIntrinsics<double>;
using PixelPointd = PixelPoint<double>;
using NormalizedPointd = NormalizedPoint<double>;

}  // namespace ibvs
