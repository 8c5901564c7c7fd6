#include <gtest/gtest.h>

#include "ibvs/se3.hpp"
#include "test_util.hpp"

namespace ibvs {
namespace {

using testing::random_pose;
using testing::random_rotation;

TEST(Adjoint, IdentityPoseIsIdentity) {
  EXPECT_TRUE(adjoint(Posed::identity()).isApprox(Matrix6<double>::Identity()));
}

TEST(Adjoint, PureTranslationCouplesAngularIntoLinear) {
  const Posed p = Posed::from_translation(Vector3<double>(0, 0, 1));
  Vector6<double> w;
  w << 0, 0, 0, 1, 0, 0;
  Vector6<double> expected;
  expected << 0, 1, 0, 1, 0, 0;
  EXPECT_LT((adjoint(p) * w - expected).norm(), 1e-15);
}

TEST(Adjoint, GroupHomomorphismAndInverse) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Posed a = random_pose(rng);
    const Posed b = random_pose(rng);
    EXPECT_LT((adjoint(a * b) - adjoint(a) * adjoint(b)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((adjoint(a.inverse()) - adjoint(a).inverse()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TransformTwist, IdentityPassesThrough) {
  std::mt19937_64 rng(3);
  const Twistd v = testing::random_twist(rng);
  EXPECT_EQ(transform_twist(Posed::identity(), v).coeffs, v.coeffs);
}

TEST(TransformTwist, CameraOffsetAlongX) {
  const Posed b_T_c = Posed::from_translation(Vector3<double>(0.1, 0, 0));
  const Twistd out = transform_twist(b_T_c, Twistd(Vector3<double>::Zero(), Vector3<double>(0, 0, 1)));
  Vector6<double> expected;
  expected << 0, -0.1, 0, 0, 0, 1;
  EXPECT_LT((out.coeffs - expected).norm(), 1e-15);
}

TEST(TransformTwist, PureRotationRotatesBothPartsWithoutCoupling) {
  std::mt19937_64 rng(5);
  const Posed p(random_rotation(rng), Vector3<double>::Zero());
  const Twistd v = testing::random_twist(rng);
  const Twistd out = transform_twist(p, v);
  EXPECT_LT((out.linear() - p.rotation * Vector3<double>(v.linear())).norm(), 1e-14);
  EXPECT_LT((out.angular() - p.rotation * Vector3<double>(v.angular())).norm(), 1e-14);
}

TEST(Pose, InverseComposesToIdentity) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const Posed p = random_pose(rng);
    const Posed id = p.inverse() * p;
    EXPECT_LT((id.matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pose, CompositionIsAssociative) {
  std::mt19937_64 rng(9);
  const Posed a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
  EXPECT_LT((((a * b) * c).matrix() - (a * (b * c)).matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rotation, LongCompositionChainsStayOrthonormal) {
  std::mt19937_64 rng(21);
  Rotationd r;
  for (int i = 0; i < 100; ++i) {
    r = r * random_rotation(rng);
    ASSERT_LT(r.orthonormality_error(), 1e-12) << "after " << i + 1 << " compositions";
  }
  // Small-angle drift over many steps.
  Rotationd spin;
  const Rotationd step = Rotationd::about_z(1e-3) * Rotationd::about_x(2e-3);
  for (int i = 0; i < 10000; ++i) spin = spin * step;
  EXPECT_LT(spin.orthonormality_error(), 1e-12);
}

TEST(Rotation, ProjectionRepairsPerturbedMatrix) {
  Matrix3<double> m = Rotationd::about_y(0.4).matrix();
  m(0, 1) += 1e-4;
  const Rotationd fixed = Rotationd(m).normalized();
  EXPECT_LT(fixed.orthonormality_error(), 1e-14);
  EXPECT_LT((fixed.matrix() - Rotationd::about_y(0.4).matrix()).norm(), 2e-4);
}

TEST(Euler, ZeroIsIdentity) {
  EXPECT_TRUE(euler_zyx_to_rotation(EulerZYXd{}).matrix().isApprox(Matrix3<double>::Identity()));
}

TEST(Euler, QuarterYawMapsXToY) {
  const Rotationd r = euler_zyx_to_rotation(EulerZYXd{0, 0, M_PI / 2});
  EXPECT_LT((r * Vector3<double>::UnitX() - Vector3<double>::UnitY()).norm(), 1e-15);
}

TEST(Euler, ComposesAsZYX) {
  const EulerZYXd a{0.3, -0.2, 1.1};
  const Matrix3<double> expected =
      (Rotationd::about_z(a.yaw) * Rotationd::about_y(a.pitch) * Rotationd::about_x(a.roll)).matrix();
  EXPECT_LT((euler_zyx_to_rotation(a).matrix() - expected).norm(), 1e-15);
}

TEST(Euler, RandomRoundTrip) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ang(-M_PI + 1e-3, M_PI - 1e-3);
  std::uniform_real_distribution<double> pitch(-M_PI / 2 + 1e-3, M_PI / 2 - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const EulerZYXd a{ang(rng), pitch(rng), ang(rng)};
    const EulerZYXd b = rotation_to_euler_zyx(euler_zyx_to_rotation(a));
    EXPECT_NEAR(a.roll, b.roll, 1e-9);
    EXPECT_NEAR(a.pitch, b.pitch, 1e-9);
    EXPECT_NEAR(a.yaw, b.yaw, 1e-9);
  }
}

TEST(Euler, DegeneratePitchThrows) {
  EXPECT_THROW(rotation_to_euler_zyx(euler_zyx_to_rotation(EulerZYXd{0.1, M_PI / 2, 0.2})), DegeneratePitchError);
  EXPECT_THROW(rotation_to_euler_zyx(euler_zyx_to_rotation(EulerZYXd{0, -M_PI / 2, 0})), DegeneratePitchError);
}

}  // namespace
}  // namespace ibvs
