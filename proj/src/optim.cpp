#include "epivo/optim.hpp"

#include <cmath>

namespace epivo {

GradientBundle loss_and_gradients(const ScalarField& target,
                                  const ScalarField& source,
                                  const ScalarField& inv_depth, const Pose& pose,
                                  const CameraIntrinsics& k,
                                  const LossConfig& config,
                                  const std::vector<ValidityMask>* scale_subsets) {
  GradientBundle bundle;
  detail::LossGradients grads;
  bundle.report = detail::total_loss_kernel(target, source, inv_depth, pose, k,
                                            config, &grads, scale_subsets);
  bundle.loss = bundle.report.total;
  bundle.d_pose = grads.d_pose;
  bundle.d_inv_depth = std::move(grads.d_inv_depth);
  return bundle;
}

std::vector<ValidityMask> kink_free_masks(const ScalarField& inv_depth,
                                          const Pose& pose,
                                          const CameraIntrinsics& k,
                                          const LossConfig& config,
                                          double margin) {
  std::vector<ValidityMask> masks;
  ScalarField d_l = inv_depth;
  for (int l = 0; l < config.num_scales; ++l) {
    if (l > 0) d_l = downsample2(d_l);
    const CameraIntrinsics k_l = k.scaled(std::pow(2.0, -l));
    const ScalarField n = normalize_inverse_depth(d_l);
    ValidityMask mask(d_l.width(), d_l.height(), true);
    for (int y = 0; y < d_l.height(); ++y) {
      for (int x = 0; x < d_l.width(); ++x) {
        const double depth = 1.0 / std::clamp(n.at(x, y), 1e-3, 1e3);
        const Projection proj = project_pixel(
            PixelCoord{static_cast<double>(x), static_cast<double>(y)}, depth,
            k_l, pose);
        if (proj.behind) {
          mask.set(x, y, false);
          continue;
        }
        const double fu = proj.pixel.x - std::floor(proj.pixel.x);
        const double fv = proj.pixel.y - std::floor(proj.pixel.y);
        const bool near_kink = fu < margin || fu > 1.0 - margin ||
                               fv < margin || fv > 1.0 - margin;
        // Also drop pixels close enough to the image border that a tiny
        // perturbation could change their validity.
        const bool near_border =
            proj.pixel.x < margin || proj.pixel.x > d_l.width() - 1.0 - margin ||
            proj.pixel.y < margin || proj.pixel.y > d_l.height() - 1.0 - margin;
        if (near_kink || near_border) mask.set(x, y, false);
      }
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kShapeMismatch, "parameter/gradient size mismatch");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state size mismatch");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

OptimResult optimize_direct(const ScalarField& target, const ScalarField& source,
                            const ScalarField& init_inv_depth,
                            const Pose& init_pose, const CameraIntrinsics& k,
                            const LossConfig& config, const OptimOptions& opts) {
  if (opts.iters < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iters must be >= 1");
  }
  OptimResult result{init_inv_depth, init_pose, {}};
  result.trace.reserve(opts.iters);

  AdamState pose_state;
  AdamState depth_state;
  pose_state.learning_rate = depth_state.learning_rate = opts.learning_rate;
  pose_state.beta1 = depth_state.beta1 = opts.beta1;
  pose_state.beta2 = depth_state.beta2 = opts.beta2;
  pose_state.epsilon = depth_state.epsilon = opts.epsilon;

  for (int it = 0; it < opts.iters; ++it) {
    GradientBundle g = loss_and_gradients(target, source, result.inv_depth,
                                          result.pose, k, config);
    result.trace.push_back(g.report);

    if (opts.optimize_pose) {
      std::vector<double> delta(6, 0.0);
      std::vector<double> grad(g.d_pose.data(), g.d_pose.data() + 6);
      adam_step(pose_state, delta, grad);
      Vector6d xi;
      for (int i = 0; i < 6; ++i) xi[i] = delta[i];
      result.pose = Pose::exp(xi).compose(result.pose);
    }
    if (opts.optimize_depth) {
      adam_step(depth_state, result.inv_depth.values(), g.d_inv_depth.values());
    }
  }
  return result;
}

}  // namespace epivo
