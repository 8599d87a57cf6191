#pragma once

#include <cstdint>
#include <vector>

#include "epivo/geometry.hpp"

namespace epivo {

struct RansacOptions {
  double threshold = 1e-6;   // Sampson error, normalized-coordinate units
  int max_iters = 1000;
  uint64_t seed = 0;
  // Off by default: a fixed iteration count keeps results independent of the
  // inlier ratio.
  bool adaptive = false;
};

struct RansacResult {
  EssentialMatrix best;
  std::vector<bool> inlier_mask;
  int inlier_count = 0;
  int iterations_run = 0;
};

struct PoseHypothesis {
  Pose pose;  // unit-norm translation
  int cheirality_votes = 0;
};

// Nister minimal solver. Input must be exactly 5 correspondences in
// normalized coordinates. Returns up to 10 candidates, each with residual
// below 1e-6 on all five inputs. Throws DegenerateConfiguration when the
// design matrix has more than a 4-dimensional null space.
std::vector<EssentialMatrix> five_point(const std::vector<Correspondence>& cs);

// First-order geometric residual. +inf when both points sit at the epipoles.
double sampson_error(const EssentialMatrix& e, const Correspondence& c);

RansacResult ransac_essential(const std::vector<Correspondence>& cs,
                              const RansacOptions& opts);

// Resolves the four-fold (R, +-t) ambiguity by midpoint triangulation and
// cheirality voting over the given inliers.
PoseHypothesis decompose_essential(const EssentialMatrix& e,
                                   const std::vector<Correspondence>& inliers);

}  // namespace epivo
