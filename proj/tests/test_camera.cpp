#include <gtest/gtest.h>

#include "ibvs/camera.hpp"
#include "test_util.hpp"

namespace ibvs {
namespace {

const CameraIntrinsicsd kBebop{};  // f = 462.137 px, c = (320, 240), 640 x 480

TEST(Intrinsics, DefaultsAreValid) {
  EXPECT_TRUE(kBebop.valid());
  CameraIntrinsicsd bad = kBebop;
  bad.fx = 0;
  EXPECT_FALSE(bad.valid());
  bad = kBebop;
  bad.cx = 700;
  EXPECT_FALSE(bad.valid());
}

TEST(Normalize, PrincipalPointMapsToOrigin) {
  const NormalizedPointd n = normalize(PixelPointd{320, 240}, kBebop);
  EXPECT_EQ(n.x, 0.0);
  EXPECT_EQ(n.y, 0.0);
}

TEST(Normalize, OneFocalLengthRight) {
  const NormalizedPointd n = normalize(PixelPointd{782.137, 240}, kBebop);
  EXPECT_NEAR(n.x, 1.0, 1e-12);
  EXPECT_EQ(n.y, 0.0);
}

TEST(Normalize, RoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  CameraIntrinsicsd k = kBebop;
  k.fy = 455.0;
  for (int i = 0; i < 100; ++i) {
    const NormalizedPointd n{u(rng), u(rng)};
    const NormalizedPointd back = normalize(denormalize(n, k), k);
    EXPECT_NEAR(back.x, n.x, 1e-14);
    EXPECT_NEAR(back.y, n.y, 1e-14);
  }
}

TEST(Project, OnAxisPoint) {
  const Projection<double> p = project(Vector3<double>(0, 0, 2), Posed::identity(), kBebop);
  EXPECT_EQ(p.pixel.u, kBebop.cx);
  EXPECT_EQ(p.pixel.v, kBebop.cy);
  EXPECT_EQ(p.depth, 2.0);
  EXPECT_TRUE(p.in_field);
}

TEST(Project, PointOneToOneAtUnitDepth) {
  const Projection<double> p = project(Vector3<double>(1, 0, 1), Posed::identity(), kBebop);
  EXPECT_NEAR(p.pixel.u, 782.137, 1e-12);
  EXPECT_FALSE(p.in_field);  // beyond the 640 px width
}

TEST(Project, HalvingDepthDoublesPixelOffset) {
  const Vector3<double> point(0.2, -0.1, 1);
  const Posed far = Posed::from_translation(Vector3<double>(0, 0, -1));  // depth 2
  const Posed near = Posed::identity();                                  // depth 1
  const Projection<double> a = project(point, far, kBebop);
  const Projection<double> b = project(point, near, kBebop);
  EXPECT_EQ(a.depth, 2.0);
  EXPECT_EQ(b.depth, 1.0);
  EXPECT_NEAR((b.pixel.u - kBebop.cx) / (a.pixel.u - kBebop.cx), 2.0, 1e-12);
  EXPECT_NEAR((b.pixel.v - kBebop.cy) / (a.pixel.v - kBebop.cy), 2.0, 1e-12);
}

TEST(Project, BehindCameraThrows) {
  EXPECT_THROW(project(Vector3<double>(0, 0, -1), Posed::identity(), kBebop), ProjectionBehindCamera);
  EXPECT_THROW(project(Vector3<double>(0, 0, 0), Posed::identity(), kBebop), ProjectionBehindCamera);
}

TEST(Project, NormalizationRecoversCameraRatios) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto scene = testing::random_scene(rng);
    for (const auto& p : scene.points) {
      const Projection<double> proj = project(p, scene.camera, kBebop);
      const NormalizedPointd n = normalize(proj.pixel, kBebop);
      const Eigen::Vector2d expected = testing::normalized_of(scene.camera, p);
      EXPECT_NEAR(n.x, expected.x(), 1e-12);
      EXPECT_NEAR(n.y, expected.y(), 1e-12);
    }
  }
}

TEST(Project, DepthInvariantUnderOpticalAxisRoll) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto scene = testing::random_scene(rng);
    const Posed rolled(scene.camera.rotation * Rotationd::about_z(0.7), scene.camera.translation);
    for (const auto& p : scene.points) {
      EXPECT_NEAR(project(p, scene.camera, kBebop).depth, project(p, rolled, kBebop).depth, 1e-12);
    }
  }
}

}  // namespace
}  // namespace ibvs
