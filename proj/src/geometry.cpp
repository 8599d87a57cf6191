#include "epivo/geometry.hpp"

#include <cmath>

namespace epivo {

NormalizedCoord normalize(const PixelCoord& p, const CameraIntrinsics& k) {
  return NormalizedCoord{(p.x - k.cx) / k.fx, (p.y - k.cy) / k.fy};
}

PixelCoord denormalize(const NormalizedCoord& q, const CameraIntrinsics& k) {
  return PixelCoord{k.fx * q.x + k.cx, k.fy * q.y + k.cy};
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Pose Pose::exp(const Vector6d& xi) {
  const Eigen::Vector3d omega = xi.head<3>();
  const Eigen::Vector3d v = xi.tail<3>();
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);
  Eigen::Matrix3d r;
  Eigen::Matrix3d vmat;
  if (theta < 1e-10) {
    r = Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
    vmat = Eigen::Matrix3d::Identity() + 0.5 * w + w * w / 6.0;
  } else {
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    const double c = (1.0 - a) / (theta * theta);
    r = Eigen::Matrix3d::Identity() + a * w + b * w * w;
    vmat = Eigen::Matrix3d::Identity() + b * w + c * w * w;
  }
  return Pose{r, vmat * v};
}

Vector6d Pose::log() const {
  const Eigen::Quaterniond q(rotation);
  Eigen::AngleAxisd aa(q);
  double angle = aa.angle();
  Eigen::Vector3d axis = aa.axis();
  if (angle > M_PI) {
    angle = 2.0 * M_PI - angle;
    axis = -axis;
  }
  const Eigen::Vector3d omega = angle * axis;
  const Eigen::Matrix3d w = skew(omega);
  Eigen::Matrix3d vinv;
  if (angle < 1e-10) {
    vinv = Eigen::Matrix3d::Identity() - 0.5 * w + w * w / 12.0;
  } else {
    const double half = 0.5 * angle;
    const double cot = half / std::tan(half);
    vinv = Eigen::Matrix3d::Identity() - 0.5 * w +
           (1.0 - cot) / (angle * angle) * w * w;
  }
  Vector6d xi;
  xi.head<3>() = omega;
  xi.tail<3>() = vinv * translation;
  return xi;
}

EssentialMatrix essential_from_pose(const Pose& pose) {
  if (pose.translation.norm() < 1e-12) {
    throw Error(ErrorCode::kZeroTranslation,
                "essential matrix undefined for pure rotation");
  }
  return EssentialMatrix(skew(pose.translation) * pose.rotation);
}

double epipolar_residual(const Correspondence& c, const EssentialMatrix& e) {
  return std::abs(
      c.source.homogeneous().dot(e.matrix() * c.target.homogeneous()));
}

Eigen::Vector3d epipolar_line(const EssentialMatrix& e, const NormalizedCoord& p) {
  return e.matrix() * p.homogeneous();
}

}  // namespace epivo
