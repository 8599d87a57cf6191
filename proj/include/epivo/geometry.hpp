#pragma once

#include <Eigen/Dense>

#include "epivo/error.hpp"

namespace epivo {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Pinhole calibration. K is upper triangular with unit bottom-right entry.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }

  Eigen::Matrix3d inverse_matrix() const {
    Eigen::Matrix3d ki;
    ki << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
    return ki;
  }

  // Intrinsics for an image downscaled by factor s (pixel centers at integers).
  CameraIntrinsics scaled(double s) const {
    return CameraIntrinsics{fx * s, fy * s, cx * s, cy * s};
  }

  bool valid() const { return fx > 0.0 && fy > 0.0; }
};

// Continuous pixel coordinates, x = column, y = row. The homogeneous third
// component is implicitly 1.
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
  Eigen::Vector3d homogeneous() const { return {x, y, 1.0}; }
};

// Coordinates on the z = 1 plane of the camera frame.
struct NormalizedCoord {
  double x = 0.0;
  double y = 0.0;
  Eigen::Vector3d homogeneous() const { return {x, y, 1.0}; }
};

struct Correspondence {
  NormalizedCoord target;
  NormalizedCoord source;
};

NormalizedCoord normalize(const PixelCoord& p, const CameraIntrinsics& k);
PixelCoord denormalize(const NormalizedCoord& q, const CameraIntrinsics& k);

// Rigid transform mapping target-frame points into the source frame.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  Pose compose(const Pose& rhs) const {
    return Pose{rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Pose inverse() const {
    return Pose{rotation.transpose(), -(rotation.transpose() * translation)};
  }

  // SE(3) exponential of a (omega, v) tangent vector.
  static Pose exp(const Vector6d& xi);

  // Inverse of exp. The rotation branch goes through a quaternion, which
  // stays stable near angle pi.
  Vector6d log() const;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

// 3x3 rank-2 matrix stored unit-Frobenius-normalized. Maps target normalized
// coordinates to source-view epipolar lines.
class EssentialMatrix {
 public:
  explicit EssentialMatrix(const Eigen::Matrix3d& m) : m_(m / m.norm()) {
    if (!(m.norm() > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "essential matrix is zero");
    }
  }
  const Eigen::Matrix3d& matrix() const { return m_; }

 private:
  Eigen::Matrix3d m_;
};

// E = [t]x R, unit-normalized. Throws ZeroTranslation for ||t|| < 1e-12.
EssentialMatrix essential_from_pose(const Pose& pose);

// |source^T E target| over homogeneous normalized coordinates (epipolar loss).
double epipolar_residual(const Correspondence& c, const EssentialMatrix& e);

// Line coefficients l = E * p in the source view; q on the line iff q.l = 0.
Eigen::Vector3d epipolar_line(const EssentialMatrix& e, const NormalizedCoord& p);

}  // namespace epivo
