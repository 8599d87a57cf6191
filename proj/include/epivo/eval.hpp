#pragma once

#include <vector>

#include "epivo/field.hpp"
#include "epivo/geometry.hpp"

namespace epivo {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

// Median-scales the prediction to the ground truth, clamps both to
// [1e-3, cap], then applies the usual error/accuracy formulas.
DepthMetrics depth_metrics(const ScalarField& pred, const ScalarField& gt,
                           const ValidityMask& gt_mask, double cap);

// Ordered poses in a snippet-relative frame; the first pose is identity.
using TrajectorySnippet = std::vector<Pose>;

struct PoseMetrics {
  double ate_mean = 0.0;
  double ate_std = 0.0;
  double atde_mean = 0.0;
  double atde_std = 0.0;
};

// Mean translation error after least-squares scale alignment, in scene units.
double ate(const TrajectorySnippet& pred, const TrajectorySnippet& gt);

// Angle between translation directions, radians. No scale correction.
double atde(const Eigen::Vector3d& pred_t, const Eigen::Vector3d& gt_t);

// Mean and population standard deviation of per-snippet ATE and per-pair
// ATDE (one pair per non-identity frame with nonzero translations).
PoseMetrics snippet_metrics(const std::vector<TrajectorySnippet>& pred,
                            const std::vector<TrajectorySnippet>& gt);

// Splits a trajectory into consecutive snippets of the given length,
// re-expressed relative to each snippet's first frame.
std::vector<TrajectorySnippet> split_snippets(const std::vector<Pose>& poses,
                                              int length = 3);

}  // namespace epivo
