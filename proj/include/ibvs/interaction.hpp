#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "ibvs/camera.hpp"

namespace ibvs {

/// Ordered corner detections. Index 0 is the top-left corner, then clockwise
/// (top-right, bottom-right, bottom-left).
template <typename Scalar>
struct FeatureSet {
  std::vector<PixelPoint<Scalar>> points;
  std::vector<bool> valid;

  FeatureSet() = default;
  explicit FeatureSet(std::vector<PixelPoint<Scalar>> pts)
      : points(std::move(pts)), valid(points.size(), true) {}

  std::size_t size() const { return points.size(); }
  bool all_valid() const { return std::all_of(valid.begin(), valid.end(), [](bool b) { return b; }); }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
  }

  /// Stacked (u1, v1, ..., uN, vN).
  VectorX<Scalar> stacked() const {
    VectorX<Scalar> s(2 * points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      s(2 * i) = points[i].u;
      s(2 * i + 1) = points[i].v;
    }
    return s;
  }
};

/// Stacked normalized coordinates (x1, y1, ..., xN, yN).
template <typename Scalar>
VectorX<Scalar> normalized_stack(const FeatureSet<Scalar>& f, const CameraIntrinsics<Scalar>& k) {
  VectorX<Scalar> s(2 * f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const NormalizedPoint<Scalar> n = normalize(f.points[i], k);
    s(2 * i) = n.x;
    s(2 * i + 1) = n.y;
  }
  return s;
}

/// e = s_d - s in normalized image units.
template <typename Scalar>
VectorX<Scalar> feature_error(const FeatureSet<Scalar>& desired, const FeatureSet<Scalar>& current,
                              const CameraIntrinsics<Scalar>& k) {
  if (desired.size() != current.size()) {
    throw Error("feature_error: desired has " + std::to_string(desired.size()) +
                " features, current has " + std::to_string(current.size()));
  }
  return normalized_stack(desired, k) - normalized_stack(current, k);
}

/// The two rows of the point-feature interaction matrix at normalized (x, y), depth z.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 6> feature_row_pair(const NormalizedPoint<Scalar>& n, Scalar z) {
  if (!(z > Scalar(0))) {
    throw DepthDomainError("feature_row_pair: depth must be positive, got " + std::to_string(double(z)));
  }
  const Scalar x = n.x;
  const Scalar y = n.y;
  const Scalar iz = Scalar(1) / z;
  Eigen::Matrix<Scalar, 2, 6> rows;
  rows << -iz, Scalar(0), x * iz, x * y, -(Scalar(1) + x * x), y,
          Scalar(0), -iz, y * iz, Scalar(1) + y * y, -x * y, -x;
  return rows;
}

template <typename Derived>
VectorX<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  return Eigen::JacobiSVD<MatrixX<S>>(m.eval()).singularValues();
}

/// sigma_max / sigma_min, or +inf when sigma_min is at rounding level.
template <typename Derived>
typename Derived::Scalar condition_number(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  const VectorX<S> sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == S(0)) return std::numeric_limits<S>::infinity();
  const S smin = sv(sv.size() - 1);
  const S floor = std::numeric_limits<S>::epsilon() * S(std::max(m.rows(), m.cols())) * sv(0);
  if (smin <= floor) return std::numeric_limits<S>::infinity();
  return sv(0) / smin;
}

/// Stacked 2N x 6 image Jacobian with its SVD diagnostics.
template <typename Scalar>
class InteractionMatrix {
 public:
  explicit InteractionMatrix(MatrixX<Scalar> m) : m_(std::move(m)) {
    sv_ = ibvs::singular_values(m_);
    cond_ = ibvs::condition_number(m_);
  }

  const MatrixX<Scalar>& matrix() const { return m_; }
  const VectorX<Scalar>& singular_values() const { return sv_; }
  Scalar condition() const { return cond_; }
  Eigen::Index feature_count() const { return m_.rows() / 2; }

 private:
  MatrixX<Scalar> m_;
  VectorX<Scalar> sv_;
  Scalar cond_;
};

/// Row pairs stacked in feature order. Every feature must be valid.
template <typename Scalar>
InteractionMatrix<Scalar> stack(const FeatureSet<Scalar>& features, const std::type_identity_t<VectorX<Scalar>>& depths,
                                const CameraIntrinsics<Scalar>& k) {
  if (features.size() == 0) throw Error("stack: empty feature set");
  if (static_cast<Eigen::Index>(features.size()) != depths.size()) {
    throw Error("stack: " + std::to_string(features.size()) + " features but " +
                std::to_string(depths.size()) + " depths");
  }
  if (!features.all_valid()) throw Error("stack: invalid feature present; filter before stacking");
  MatrixX<Scalar> l(2 * features.size(), 6);
  for (std::size_t i = 0; i < features.size(); ++i) {
    l.template block<2, 6>(2 * i, 0) = feature_row_pair(normalize(features.points[i], k), depths(i));
  }
  return InteractionMatrix<Scalar>(std::move(l));
}

template <typename Scalar>
struct PseudoInverse {
  MatrixX<Scalar> matrix;
  Eigen::Index rank = 0;
  bool truncated = false;  // at least one singular value was dropped
};

inline constexpr double kDefaultSigmaMinTol = 1e-6;

/// Moore-Penrose pseudo-inverse by SVD. Singular values below
/// sigma_min_tol * sigma_max are treated as zero.
template <typename Derived>
PseudoInverse<typename Derived::Scalar> pseudo_inverse(const Eigen::MatrixBase<Derived>& m,
                                                       typename Derived::Scalar sigma_min_tol =
                                                           typename Derived::Scalar(kDefaultSigmaMinTol)) {
  using S = typename Derived::Scalar;
  Eigen::JacobiSVD<MatrixX<S>> svd(m.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorX<S>& sv = svd.singularValues();
  const S cutoff = sv.size() > 0 ? sigma_min_tol * sv(0) : S(0);
  PseudoInverse<S> out;
  VectorX<S> inv = VectorX<S>::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > S(0)) {
      inv(i) = S(1) / sv(i);
      ++out.rank;
    }
  }
  if (out.rank == 0) throw SingularInteraction("pseudo_inverse: all singular values truncated");
  out.truncated = out.rank < sv.size();
  out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

template <typename Scalar>
PseudoInverse<Scalar> pseudo_inverse(const InteractionMatrix<Scalar>& l,
                                     Scalar sigma_min_tol = Scalar(kDefaultSigmaMinTol)) {
  return pseudo_inverse(l.matrix(), sigma_min_tol);
}

/// Keeps columns (v_x, v_y, v_z, w_z) of a 2N x 6 matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> reduce_to_4dof(const Eigen::MatrixBase<Derived>& l) {
  using S = typename Derived::Scalar;
  if (l.cols() != 6) throw Error("reduce_to_4dof: expected 6 columns, got " + std::to_string(l.cols()));
  MatrixX<S> r(l.rows(), 4);
  r.leftCols(3) = l.leftCols(3);
  r.col(3) = l.col(5);
  return r;
}

using FeatureSetd = FeatureSet<double>;
using InteractionMatrixd = InteractionMatrix<double>;

}  // namespace ibvs
