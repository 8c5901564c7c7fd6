#pragma once

#include <cmath>
#include <Eigen/Dense>

#include "ibvs/errors.hpp"

namespace ibvs {

template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar> using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;
template <typename Scalar> using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar> using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Cross-product matrix: skew(a) * b == a.cross(b).
template <typename Derived>
Matrix3<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  Matrix3<S> m;
  m << S(0), -a(2), a(1),
       a(2), S(0), -a(0),
       -a(1), a(0), S(0);
  return m;
}

/// Nearest orthogonal matrix (polar factor) with det forced to +1.
template <typename Derived>
Matrix3<typename Derived::Scalar> project_to_so3(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  Eigen::JacobiSVD<Matrix3<S>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3<S> u = svd.matrixU();
  const Matrix3<S> v = svd.matrixV();
  if ((u * v.transpose()).determinant() < S(0)) u.col(2) *= S(-1);
  return u * v.transpose();
}

/// Proper rotation. Products are re-projected onto SO(3) every
/// kRenormalizeEvery compositions so long chains keep R*R^T = I.
template <typename Scalar>
class Rotation {
 public:
  static constexpr int kRenormalizeEvery = 16;

  Rotation() : m_(Matrix3<Scalar>::Identity()) {}

  /// Takes `m` as-is; call normalized() if it may carry drift.
  explicit Rotation(const Matrix3<Scalar>& m) : m_(m) {}

  static Rotation identity() { return Rotation(); }

  static Rotation about_x(Scalar a) {
    return Rotation(Eigen::AngleAxis<Scalar>(a, Vector3<Scalar>::UnitX()).toRotationMatrix());
  }
  static Rotation about_y(Scalar a) {
    return Rotation(Eigen::AngleAxis<Scalar>(a, Vector3<Scalar>::UnitY()).toRotationMatrix());
  }
  static Rotation about_z(Scalar a) {
    return Rotation(Eigen::AngleAxis<Scalar>(a, Vector3<Scalar>::UnitZ()).toRotationMatrix());
  }
  static Rotation from_axis_angle(const Vector3<Scalar>& axis, Scalar angle) {
    return Rotation(Eigen::AngleAxis<Scalar>(angle, axis.normalized()).toRotationMatrix());
  }
  /// exp map of a rotation vector.
  static Rotation exp(const Vector3<Scalar>& w) {
    const Scalar angle = w.norm();
    if (angle == Scalar(0)) return Rotation();
    return from_axis_angle(w / angle, angle);
  }

  const Matrix3<Scalar>& matrix() const { return m_; }
  Scalar operator()(int r, int c) const { return m_(r, c); }

  Rotation inverse() const {
    Rotation r(m_.transpose());
    r.depth_ = depth_;
    return r;
  }

  Rotation normalized() const { return Rotation(project_to_so3(m_)); }

  Rotation operator*(const Rotation& other) const {
    Rotation r(m_ * other.m_);
    r.depth_ = depth_ + other.depth_ + 1;
    if (r.depth_ >= kRenormalizeEvery) r = r.normalized();
    return r;
  }

  Vector3<Scalar> operator*(const Vector3<Scalar>& v) const { return m_ * v; }

  /// Max deviation of R*R^T from identity and of det(R) from 1.
  Scalar orthonormality_error() const {
    const Scalar e1 = (m_ * m_.transpose() - Matrix3<Scalar>::Identity()).cwiseAbs().maxCoeff();
    const Scalar e2 = std::abs(m_.determinant() - Scalar(1));
    return std::max(e1, e2);
  }

 private:
  Matrix3<Scalar> m_;
  int depth_ = 0;  // compositions since last projection
};

/// Rigid transform mapping child-frame coordinates into the parent frame.
template <typename Scalar>
struct Pose {
  Rotation<Scalar> rotation;
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();

  Pose() = default;
  Pose(const Rotation<Scalar>& r, const Vector3<Scalar>& t) : rotation(r), translation(t) {}

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Vector3<Scalar>& t) { return Pose(Rotation<Scalar>(), t); }

  /// this ∘ other
  Pose operator*(const Pose& other) const {
    return Pose(rotation * other.rotation, rotation * other.translation + translation);
  }

  Pose inverse() const {
    const Rotation<Scalar> rt = rotation.inverse();
    return Pose(rt, -(rt * translation));
  }

  Vector3<Scalar> operator*(const Vector3<Scalar>& p) const { return rotation * p + translation; }

  Eigen::Matrix<Scalar, 4, 4> matrix() const {
    Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
    m.template topLeftCorner<3, 3>() = rotation.matrix();
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// Rigid-body velocity, ordered (v_x, v_y, v_z, w_x, w_y, w_z) everywhere.
template <typename Scalar>
struct Twist {
  Vector6<Scalar> coeffs = Vector6<Scalar>::Zero();

  Twist() = default;
  explicit Twist(const Vector6<Scalar>& c) : coeffs(c) {}
  Twist(const Vector3<Scalar>& linear, const Vector3<Scalar>& angular) {
    coeffs << linear, angular;
  }

  static Twist zero() { return Twist(); }

  auto linear() const { return coeffs.template head<3>(); }
  auto angular() const { return coeffs.template tail<3>(); }
  auto linear() { return coeffs.template head<3>(); }
  auto angular() { return coeffs.template tail<3>(); }

  Scalar operator[](int i) const { return coeffs(i); }
  Scalar& operator[](int i) { return coeffs(i); }

  bool all_finite() const { return coeffs.allFinite(); }
};

/// 6x6 adjoint [[R, skew(t) R], [0, R]] for (v; w)-ordered twists.
template <typename Scalar>
Matrix6<Scalar> adjoint(const Pose<Scalar>& pose) {
  const Matrix3<Scalar>& r = pose.rotation.matrix();
  Matrix6<Scalar> adj = Matrix6<Scalar>::Zero();
  adj.template topLeftCorner<3, 3>() = r;
  adj.template topRightCorner<3, 3>() = skew(pose.translation) * r;
  adj.template bottomRightCorner<3, 3>() = r;
  return adj;
}

/// Re-expresses a twist given in the child frame of `pose` in its parent frame.
template <typename Scalar>
Twist<Scalar> transform_twist(const Pose<Scalar>& pose, const Twist<Scalar>& twist) {
  return Twist<Scalar>(Vector6<Scalar>(adjoint(pose) * twist.coeffs));
}

/// ZYX Euler angles: R = Rz(yaw) * Ry(pitch) * Rx(roll). Radians.
template <typename Scalar>
struct EulerZYX {
  Scalar roll = 0;
  Scalar pitch = 0;
  Scalar yaw = 0;
};

template <typename Scalar>
Rotation<Scalar> euler_zyx_to_rotation(const EulerZYX<Scalar>& a) {
  using Eigen::AngleAxis;
  const Matrix3<Scalar> m = (AngleAxis<Scalar>(a.yaw, Vector3<Scalar>::UnitZ()) *
                             AngleAxis<Scalar>(a.pitch, Vector3<Scalar>::UnitY()) *
                             AngleAxis<Scalar>(a.roll, Vector3<Scalar>::UnitX()))
                                .toRotationMatrix();
  return Rotation<Scalar>(m);
}

template <typename Scalar>
EulerZYX<Scalar> rotation_to_euler_zyx(const Rotation<Scalar>& r) {
  const Scalar r20 = r(2, 0);
  if (!(std::abs(r20) < Scalar(1) - Scalar(1e-9))) {
    throw DegeneratePitchError("rotation_to_euler_zyx: pitch at +-pi/2, roll and yaw not separable");
  }
  EulerZYX<Scalar> a;
  a.pitch = std::asin(-r20);
  a.roll = std::atan2(r(2, 1), r(2, 2));
  a.yaw = std::atan2(r(1, 0), r(0, 0));
  return a;
}

using Rotationd = Rotation<double>;
using Posed = Pose<double>;
using Twistd = Twist<double>;
using EulerZYXd = EulerZYX<double>;

}  // namespace ibvs
