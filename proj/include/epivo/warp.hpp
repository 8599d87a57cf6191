#pragma once

#include <utility>

#include "epivo/field.hpp"
#include "epivo/geometry.hpp"

namespace epivo {

struct Projection {
  PixelCoord pixel;
  double z_source = 0.0;
  bool behind = false;  // z_source <= 1e-9; pixel marked invalid downstream
};

// K (R D K^-1 p + t) followed by the perspective division.
Projection project_pixel(const PixelCoord& p, double depth,
                         const CameraIntrinsics& k, const Pose& pose);

struct Sample {
  double value[3] = {0.0, 0.0, 0.0};
  // d(value)/dx and d(value)/dy of the bilinear interpolant; at integer
  // coordinates this is the right-limit cell.
  double dx[3] = {0.0, 0.0, 0.0};
  double dy[3] = {0.0, 0.0, 0.0};
  bool in_bounds = false;
};

// Four-neighbor bilinear interpolation, weights (1-|dx|)(1-|dy|).
// in_bounds is false (and the value 0) outside [0, W-1] x [0, H-1].
Sample bilinear_sample(const ScalarField& img, const PixelCoord& q);

struct WarpResult {
  ScalarField image;
  ValidityMask mask;
};

// Resamples src at the projections of every target pixel. Mask is false
// where the projection is behind the camera or out of bounds.
WarpResult warp_image(const ScalarField& src, const ScalarField& target_depth,
                      const CameraIntrinsics& k, const Pose& pose);

}  // namespace epivo
