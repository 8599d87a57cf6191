#pragma once

#include <vector>

#include "epivo/losses.hpp"

namespace epivo {

struct GradientBundle {
  Vector6d d_pose = Vector6d::Zero();  // wrt a left-multiplied tangent at 0
  ScalarField d_inv_depth;
  double loss = 0.0;
  LossReport report;
};

// Loss value (identical to total_loss) plus analytic gradients with respect
// to the pose tangent and the full-resolution inverse depth.
GradientBundle loss_and_gradients(const ScalarField& target,
                                  const ScalarField& source,
                                  const ScalarField& inv_depth, const Pose& pose,
                                  const CameraIntrinsics& k,
                                  const LossConfig& config,
                                  const std::vector<ValidityMask>* scale_subsets =
                                      nullptr);

// One mask per scale, false where the projected source coordinate lies
// within `margin` of an integer grid line (a bilinear kink). Frozen at the
// given state and passed to both gradient routes during checks.
std::vector<ValidityMask> kink_free_masks(const ScalarField& inv_depth,
                                          const Pose& pose,
                                          const CameraIntrinsics& k,
                                          const LossConfig& config,
                                          double margin = 1e-3);

// First/second moment state for one flat parameter vector.
struct AdamState {
  int step = 0;
  double learning_rate = 2e-4;  // default from the training setup
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
};

// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads);

struct OptimOptions {
  int iters = 500;
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool optimize_pose = true;
  bool optimize_depth = true;
};

struct OptimResult {
  ScalarField inv_depth;
  Pose pose;
  std::vector<LossReport> trace;  // one report per iteration
};

// Adam descent on (pose tangent, inverse depth); pose updates are
// left-multiplicative, pose <- exp(step) * pose.
OptimResult optimize_direct(const ScalarField& target, const ScalarField& source,
                            const ScalarField& init_inv_depth,
                            const Pose& init_pose, const CameraIntrinsics& k,
                            const LossConfig& config, const OptimOptions& opts);

}  // namespace epivo
