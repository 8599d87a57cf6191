#pragma once

#include <optional>
#include <vector>

#include "epivo/field.hpp"
#include "epivo/geometry.hpp"
#include "epivo/warp.hpp"

namespace epivo {

struct LossConfig {
  int num_scales = 4;
  double lambda_smooth_base = 0.2;  // per-scale weight is base / 2^l
  bool use_epipolar_weight = false;
  std::optional<EssentialMatrix> epipolar_E;
  // Treats the epipolar weight as a constant in the gradient.
  bool stop_gradient_on_weight = false;

  void validate() const;
  double lambda_smooth(int scale) const;
};

struct LossReport {
  std::vector<double> warp_loss;
  std::vector<double> smooth_loss;
  std::vector<int> valid_pixel_counts;
  double total = 0.0;
  bool no_valid_pixels = false;
};

// Mean of |target - warped| over valid pixels and channels. Zero with the
// warning flag set when nothing is valid.
double photometric_loss(const ScalarField& target, const ScalarField& warped,
                        const ValidityMask& mask, bool* no_valid = nullptr);

// Per pixel exp(|p_s^T E p_t|), with the source-side coordinate obtained by
// projecting through the given pose and depth. Invalid pixels get weight 1.
ScalarField epipolar_weight_map(const ScalarField& depth,
                                const CameraIntrinsics& k, const Pose& pose,
                                const EssentialMatrix& e);

// Same weight, but with the source-side coordinate taken from an explicit
// per-pixel match grid (pixel coordinates). A projection through a single
// rigid pose always lands on its own epipolar line, so independently moving
// content only shows up when the matches come from elsewhere (e.g. the
// rendered correspondences of a synthetic mover).
ScalarField epipolar_weight_map_from_matches(const ScalarField& match_x,
                                             const ScalarField& match_y,
                                             const CameraIntrinsics& k,
                                             const EssentialMatrix& e);

double weighted_photometric_loss(const ScalarField& target,
                                 const ScalarField& warped,
                                 const ValidityMask& mask,
                                 const ScalarField& weights,
                                 bool* no_valid = nullptr);

// Forward-difference inverse-depth gradients attenuated by image gradients;
// mean over all pixels. Multi-channel images are reduced to their mean.
double smoothness_loss(const ScalarField& inv_depth, const ScalarField& image);

// Scales the field to unit mean. Throws DegenerateDepth for mean <= 1e-12.
ScalarField normalize_inverse_depth(const ScalarField& inv_depth);

LossReport total_loss(const ScalarField& target, const ScalarField& source,
                      const ScalarField& inv_depth, const Pose& pose,
                      const CameraIntrinsics& k, const LossConfig& config);

namespace detail {

struct LossGradients {
  Vector6d d_pose = Vector6d::Zero();
  ScalarField d_inv_depth;
};

// Shared forward/backward kernel behind total_loss and loss_and_gradients.
// scale_subsets, when given, holds one mask per scale that further restricts
// the photometric sums; the gradient-check harness freezes such masks at the
// unperturbed point to exclude bilinear kink pixels coherently from both the
// analytic and the finite-difference route.
LossReport total_loss_kernel(const ScalarField& target,
                             const ScalarField& source,
                             const ScalarField& inv_depth, const Pose& pose,
                             const CameraIntrinsics& k, const LossConfig& config,
                             LossGradients* grads,
                             const std::vector<ValidityMask>* scale_subsets = nullptr);

}  // namespace detail

}  // namespace epivo
