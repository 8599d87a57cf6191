#include "epivo/warp.hpp"

#include <cmath>

#include "epivo/parallel.hpp"

namespace epivo {

Projection project_pixel(const PixelCoord& p, double depth,
                         const CameraIntrinsics& k, const Pose& pose) {
  Projection out;
  // An identity pose maps every pixel to itself; the algebraic shortcut keeps
  // the invariant exact instead of losing a ulp through the K^-1 / K round
  // trip.
  if (pose.rotation == Eigen::Matrix3d::Identity() &&
      pose.translation == Eigen::Vector3d::Zero()) {
    out.z_source = depth;
    if (depth <= 1e-9) {
      out.behind = true;
      return out;
    }
    out.pixel = p;
    return out;
  }
  const Eigen::Vector3d ray = k.inverse_matrix() * p.homogeneous();
  const Eigen::Vector3d cam = pose.rotation * (depth * ray) + pose.translation;
  out.z_source = cam.z();
  if (cam.z() <= 1e-9) {
    out.behind = true;
    return out;
  }
  out.pixel.x = k.fx * cam.x() / cam.z() + k.cx;
  out.pixel.y = k.fy * cam.y() / cam.z() + k.cy;
  return out;
}

Sample bilinear_sample(const ScalarField& img, const PixelCoord& q) {
  Sample s;
  const double xmax = img.width() - 1.0;
  const double ymax = img.height() - 1.0;
  if (!(q.x >= 0.0 && q.x <= xmax && q.y >= 0.0 && q.y <= ymax)) {
    return s;
  }
  s.in_bounds = true;
  int x0 = static_cast<int>(std::floor(q.x));
  int y0 = static_cast<int>(std::floor(q.y));
  x0 = std::min(x0, img.width() - 2);
  y0 = std::min(y0, img.height() - 2);
  if (img.width() == 1) x0 = 0;
  if (img.height() == 1) y0 = 0;
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = q.x - x0;
  const double fy = q.y - y0;
  for (int c = 0; c < img.channels(); ++c) {
    const double v00 = img.at(x0, y0, c);
    const double v10 = img.at(x1, y0, c);
    const double v01 = img.at(x0, y1, c);
    const double v11 = img.at(x1, y1, c);
    s.value[c] = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
                 fy * ((1.0 - fx) * v01 + fx * v11);
    s.dx[c] = (1.0 - fy) * (v10 - v00) + fy * (v11 - v01);
    s.dy[c] = (1.0 - fx) * (v01 - v00) + fx * (v11 - v10);
  }
  return s;
}

WarpResult warp_image(const ScalarField& src, const ScalarField& target_depth,
                      const CameraIntrinsics& k, const Pose& pose) {
  if (src.width() != target_depth.width() || src.height() != target_depth.height() ||
      target_depth.channels() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "source image and target depth dimensions differ");
  }
  WarpResult out{ScalarField(src.width(), src.height(), src.channels()),
                 ValidityMask(src.width(), src.height(), false)};
  parallel_rows(src.height(), [&](int y) {
    for (int x = 0; x < src.width(); ++x) {
      const Projection proj = project_pixel(
          PixelCoord{static_cast<double>(x), static_cast<double>(y)},
          target_depth.at(x, y), k, pose);
      if (proj.behind) continue;
      const Sample s = bilinear_sample(src, proj.pixel);
      if (!s.in_bounds) continue;
      out.mask.set(x, y, true);
      for (int c = 0; c < src.channels(); ++c) {
        out.image.at(x, y, c) = s.value[c];
      }
    }
  });
  return out;
}

}  // namespace epivo
