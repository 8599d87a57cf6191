#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epivo/geometry.hpp"
#include "epivo/rng.hpp"

using namespace epivo;

namespace {
const CameraIntrinsics kKitti{721.5377, 721.5377, 609.5593, 172.854};
}

TEST_CASE("normalize maps the principal point to the optical axis") {
  const NormalizedCoord q = normalize(PixelCoord{kKitti.cx, kKitti.cy}, kKitti);
  CHECK(q.x == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(q.y == doctest::Approx(0.0).epsilon(1e-15));
  const NormalizedCoord u =
      normalize(PixelCoord{kKitti.cx + kKitti.fx, kKitti.cy}, kKitti);
  CHECK(u.x == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(u.y == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("normalize matches a general matrix inverse") {
  // frozen from an explicit 3x3 inverse multiply
  const NormalizedCoord q = normalize(PixelCoord{700.0, 200.0}, kKitti);
  CHECK(q.x == doctest::Approx(0.12534438602445863).epsilon(1e-14));
  CHECK(q.y == doctest::Approx(0.037622427767807554).epsilon(1e-14));
}

TEST_CASE("normalize/denormalize are mutual inverses") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const PixelCoord p{rng.uniform(-500.0, 1500.0), rng.uniform(-500.0, 1500.0)};
    const PixelCoord back = denormalize(normalize(p, kKitti), kKitti);
    CHECK(std::abs(back.x - p.x) < 1e-9);
    CHECK(std::abs(back.y - p.y) < 1e-9);
  }
}

TEST_CASE("K times its inverse is identity") {
  const Eigen::Matrix3d prod = kKitti.matrix() * kKitti.inverse_matrix();
  CHECK((prod - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("pose exp/log round-trip") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Vector6d xi;
    for (int j = 0; j < 6; ++j) xi[j] = rng.uniform(-1.0, 1.0);
    const Pose p = Pose::exp(xi);
    CHECK((p.rotation.transpose() * p.rotation - Eigen::Matrix3d::Identity())
              .norm() < 1e-9);
    CHECK(p.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    const Pose q = Pose::exp(p.log());
    CHECK((q.rotation - p.rotation).norm() < 1e-9);
    CHECK((q.translation - p.translation).norm() < 1e-9);
  }
}

TEST_CASE("pose exp of zero is the identity") {
  const Pose p = Pose::exp(Vector6d::Zero());
  CHECK((p.rotation - Eigen::Matrix3d::Identity()).norm() == 0.0);
  CHECK(p.translation.norm() == 0.0);
}

TEST_CASE("compose and inverse are consistent") {
  Rng rng(5);
  Vector6d a, b;
  for (int j = 0; j < 6; ++j) {
    a[j] = rng.uniform(-0.5, 0.5);
    b[j] = rng.uniform(-0.5, 0.5);
  }
  const Pose pa = Pose::exp(a), pb = Pose::exp(b);
  const Pose id = pa.compose(pa.inverse());
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  CHECK(id.translation.norm() < 1e-12);
  const Eigen::Vector3d x(0.3, -0.4, 2.0);
  CHECK((pa.compose(pb).apply(x) - pa.apply(pb.apply(x))).norm() < 1e-12);
}

TEST_CASE("essential matrix axis cases") {
  Pose p;
  p.translation = Eigen::Vector3d(1, 0, 0);
  Eigen::Matrix3d ex;
  ex << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  ex /= ex.norm();
  const Eigen::Matrix3d e = essential_from_pose(p).matrix();
  CHECK(std::min((e - ex).norm(), (e + ex).norm()) < 1e-12);

  p.translation = Eigen::Vector3d(0, 0, 1);
  Eigen::Matrix3d ez;
  ez << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  ez /= ez.norm();
  const Eigen::Matrix3d e2 = essential_from_pose(p).matrix();
  CHECK(std::min((e2 - ez).norm(), (e2 + ez).norm()) < 1e-12);
}

TEST_CASE("essential_from_pose rejects zero translation") {
  Pose p;
  CHECK_THROWS_AS((void)essential_from_pose(p), Error);
  try {
    (void)essential_from_pose(p);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroTranslation);
  }
}

TEST_CASE("essential matrix invariants on random poses") {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    Vector6d xi;
    for (int j = 0; j < 6; ++j) xi[j] = rng.uniform(-1.0, 1.0);
    const Pose pose = Pose::exp(xi);
    if (pose.translation.norm() < 1e-6) continue;
    const Eigen::Matrix3d e = essential_from_pose(pose).matrix();
    CHECK(std::abs(e.determinant()) < 1e-9);
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(e);
    CHECK(std::abs(svd.singularValues()(0) - svd.singularValues()(1)) < 1e-9);
    CHECK(svd.singularValues()(2) < 1e-9);
    const Eigen::Matrix3d cubic =
        2.0 * e * e.transpose() * e - (e * e.transpose()).trace() * e;
    CHECK(cubic.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("exact correspondences satisfy the epipolar constraint") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    Vector6d xi;
    for (int j = 0; j < 6; ++j) xi[j] = rng.uniform(-0.5, 0.5);
    const Pose pose = Pose::exp(xi);
    if (pose.translation.norm() < 1e-6) continue;
    const EssentialMatrix e = essential_from_pose(pose);
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector3d x(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                              rng.uniform(4.0, 12.0));
      const Eigen::Vector3d xs = pose.apply(x);
      if (xs.z() < 1e-3) continue;
      Correspondence c;
      c.target = NormalizedCoord{x.x() / x.z(), x.y() / x.z()};
      c.source = NormalizedCoord{xs.x() / xs.z(), xs.y() / xs.z()};
      CHECK(epipolar_residual(c, e) < 1e-10);
    }
  }
}

TEST_CASE("residuals vanish along the epipolar line and grow across it") {
  Pose pose;
  pose.rotation =
      Eigen::AngleAxisd(0.1, Eigen::Vector3d(0.2, 1.0, 0.1).normalized())
          .toRotationMatrix();
  pose.translation = Eigen::Vector3d(0.4, -0.1, 0.2);
  const EssentialMatrix e = essential_from_pose(pose);
  const Eigen::Vector3d x(0.3, -0.2, 8.0);
  const Eigen::Vector3d xs = pose.apply(x);
  Correspondence c;
  c.target = NormalizedCoord{x.x() / x.z(), x.y() / x.z()};
  c.source = NormalizedCoord{xs.x() / xs.z(), xs.y() / xs.z()};

  const Eigen::Vector3d l = epipolar_line(e, c.target);
  const Eigen::Vector2d grad(l(0), l(1));
  const Eigen::Vector2d along(-l(1), l(0));

  Correspondence shifted = c;
  shifted.source.x += 0.01 * along.normalized()(0);
  shifted.source.y += 0.01 * along.normalized()(1);
  CHECK(epipolar_residual(shifted, e) < 1e-10);

  const double delta = 1e-3;
  Correspondence perp = c;
  perp.source.x += delta * grad.normalized()(0);
  perp.source.y += delta * grad.normalized()(1);
  CHECK(epipolar_residual(perp, e) ==
        doctest::Approx(delta * grad.norm()).epsilon(1e-9));
}

TEST_CASE("epipolar line axis case and epipole membership") {
  Pose p;
  p.translation = Eigen::Vector3d(1, 0, 0);
  const EssentialMatrix e = essential_from_pose(p);
  const Eigen::Vector3d l = epipolar_line(e, NormalizedCoord{0.0, 0.0});
  // line y = 0 up to scale
  CHECK(std::abs(l(0)) < 1e-15);
  CHECK(std::abs(l(2)) < 1e-15);
  CHECK(std::abs(l(1)) > 0.1);

  // every epipolar line passes through the left null direction of E
  Pose q;
  q.rotation = Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY()).toRotationMatrix();
  q.translation = Eigen::Vector3d(0.5, 0.2, 1.0);
  const EssentialMatrix e2 = essential_from_pose(q);
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(e2.matrix(),
                                              Eigen::ComputeFullU);
  const Eigen::Vector3d epipole = svd.matrixU().col(2);
  Rng rng(29);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector3d line = epipolar_line(
        e2, NormalizedCoord{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    CHECK(std::abs(line.dot(epipole)) < 1e-10);
  }
}

TEST_CASE("residual is scale invariant through renormalization") {
  Pose p;
  p.translation = Eigen::Vector3d(0.3, 0.2, 0.9);
  p.rotation = Eigen::AngleAxisd(0.2, Eigen::Vector3d::UnitX()).toRotationMatrix();
  const EssentialMatrix a = essential_from_pose(p);
  const EssentialMatrix b(7.0 * a.matrix());
  Correspondence c;
  c.target = NormalizedCoord{0.1, -0.3};
  c.source = NormalizedCoord{0.2, 0.05};
  CHECK(epipolar_residual(c, a) == epipolar_residual(c, b));
}
