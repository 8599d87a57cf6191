#include "epivo/losses.hpp"

#include <cmath>

#include "epivo/parallel.hpp"

namespace epivo {

namespace {

constexpr double kInvDepthMin = 1e-3;
constexpr double kInvDepthMax = 1e3;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_same_shape(const ScalarField& a, const ScalarField& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch, "field dimensions differ");
  }
}

}  // namespace

void LossConfig::validate() const {
  if (num_scales < 1) {
    throw Error(ErrorCode::kInvalidArgument, "num_scales must be >= 1");
  }
  if (lambda_smooth_base < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "lambda_smooth_base must be >= 0");
  }
  if (use_epipolar_weight && !epipolar_E.has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                "epipolar weighting requires an essential matrix");
  }
}

double LossConfig::lambda_smooth(int scale) const {
  return lambda_smooth_base / std::pow(2.0, scale);
}

double photometric_loss(const ScalarField& target, const ScalarField& warped,
                        const ValidityMask& mask, bool* no_valid) {
  check_same_shape(target, warped);
  double sum = 0.0;
  int n = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!mask.at(x, y)) continue;
      ++n;
      for (int c = 0; c < target.channels(); ++c) {
        sum += std::abs(target.at(x, y, c) - warped.at(x, y, c));
      }
    }
  }
  if (no_valid != nullptr) *no_valid = (n == 0);
  if (n == 0) return 0.0;
  return sum / (static_cast<double>(n) * target.channels());
}

ScalarField epipolar_weight_map(const ScalarField& depth,
                                const CameraIntrinsics& k, const Pose& pose,
                                const EssentialMatrix& e) {
  ScalarField weights(depth.width(), depth.height(), 1, 1.0);
  const Eigen::Matrix3d ki = k.inverse_matrix();
  parallel_rows(depth.height(), [&](int y) {
    for (int x = 0; x < depth.width(); ++x) {
      const Eigen::Vector3d ray = ki * Eigen::Vector3d(x, y, 1.0);
      const Eigen::Vector3d cam =
          pose.rotation * (depth.at(x, y) * ray) + pose.translation;
      if (cam.z() <= 1e-9) continue;  // invalid: weight stays 1
      const PixelCoord proj{k.fx * cam.x() / cam.z() + k.cx,
                            k.fy * cam.y() / cam.z() + k.cy};
      if (!(proj.x >= 0.0 && proj.x <= depth.width() - 1.0 && proj.y >= 0.0 &&
            proj.y <= depth.height() - 1.0)) {
        continue;
      }
      const Eigen::Vector3d line = e.matrix() * ray;
      const double rho =
          cam.x() / cam.z() * line.x() + cam.y() / cam.z() * line.y() + line.z();
      weights.at(x, y) = std::exp(std::abs(rho));
    }
  });
  return weights;
}

ScalarField epipolar_weight_map_from_matches(const ScalarField& match_x,
                                             const ScalarField& match_y,
                                             const CameraIntrinsics& k,
                                             const EssentialMatrix& e) {
  check_same_shape(match_x, match_y);
  ScalarField weights(match_x.width(), match_x.height(), 1, 1.0);
  for (int y = 0; y < match_x.height(); ++y) {
    for (int x = 0; x < match_x.width(); ++x) {
      const NormalizedCoord pt =
          normalize(PixelCoord{static_cast<double>(x), static_cast<double>(y)}, k);
      const NormalizedCoord ps =
          normalize(PixelCoord{match_x.at(x, y), match_y.at(x, y)}, k);
      weights.at(x, y) = std::exp(
          epipolar_residual(Correspondence{pt, ps}, e));
    }
  }
  return weights;
}

double weighted_photometric_loss(const ScalarField& target,
                                 const ScalarField& warped,
                                 const ValidityMask& mask,
                                 const ScalarField& weights, bool* no_valid) {
  check_same_shape(target, warped);
  if (weights.width() != target.width() || weights.height() != target.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "weight map dimensions differ");
  }
  double sum = 0.0;
  int n = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (!mask.at(x, y)) continue;
      ++n;
      double err = 0.0;
      for (int c = 0; c < target.channels(); ++c) {
        err += std::abs(target.at(x, y, c) - warped.at(x, y, c));
      }
      sum += weights.at(x, y) * err / target.channels();
    }
  }
  if (no_valid != nullptr) *no_valid = (n == 0);
  if (n == 0) return 0.0;
  return sum / n;
}

double smoothness_loss(const ScalarField& inv_depth, const ScalarField& image) {
  if (inv_depth.width() != image.width() || inv_depth.height() != image.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "inverse depth and image dimensions differ");
  }
  const ScalarField gray = to_gray(image);
  const int w = inv_depth.width();
  const int h = inv_depth.height();
  double sum = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) {
        sum += std::abs(inv_depth.at(x + 1, y) - inv_depth.at(x, y)) *
               std::exp(-std::abs(gray.at(x + 1, y) - gray.at(x, y)));
      }
      if (y + 1 < h) {
        sum += std::abs(inv_depth.at(x, y + 1) - inv_depth.at(x, y)) *
               std::exp(-std::abs(gray.at(x, y + 1) - gray.at(x, y)));
      }
    }
  }
  return sum / (static_cast<double>(w) * h);
}

ScalarField normalize_inverse_depth(const ScalarField& inv_depth) {
  const double mu = inv_depth.mean();
  if (mu <= 1e-12) {
    throw Error(ErrorCode::kDegenerateDepth, "inverse depth mean is ~0");
  }
  ScalarField out = inv_depth;
  for (double& v : out.values()) v /= mu;
  return out;
}

LossReport total_loss(const ScalarField& target, const ScalarField& source,
                      const ScalarField& inv_depth, const Pose& pose,
                      const CameraIntrinsics& k, const LossConfig& config) {
  return detail::total_loss_kernel(target, source, inv_depth, pose, k, config,
                                   nullptr);
}

namespace detail {

LossReport total_loss_kernel(const ScalarField& target,
                             const ScalarField& source,
                             const ScalarField& inv_depth, const Pose& pose,
                             const CameraIntrinsics& k, const LossConfig& config,
                             LossGradients* grads,
                             const std::vector<ValidityMask>* scale_subsets) {
  config.validate();
  check_same_shape(target, source);
  if (inv_depth.width() != target.width() ||
      inv_depth.height() != target.height() || inv_depth.channels() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "inverse depth does not match the image pair");
  }

  LossReport report;
  if (grads != nullptr) {
    grads->d_pose.setZero();
    grads->d_inv_depth = ScalarField(inv_depth.width(), inv_depth.height(), 1);
  }

  ScalarField t_l = target;
  ScalarField s_l = source;
  ScalarField d_l = inv_depth;
  std::vector<std::pair<int, int>> level_dims;  // fine dims above each level

  for (int l = 0; l < config.num_scales; ++l) {
    if (l > 0) {
      level_dims.emplace_back(d_l.width(), d_l.height());
      t_l = downsample2(t_l);
      s_l = downsample2(s_l);
      d_l = downsample2(d_l);
    }
    const CameraIntrinsics k_l = k.scaled(std::pow(2.0, -l));
    const int w = d_l.width();
    const int h = d_l.height();
    const int channels = t_l.channels();
    const ValidityMask* subset = nullptr;
    if (scale_subsets != nullptr) {
      subset = &(*scale_subsets)[l];
      if (subset->width() != w || subset->height() != h) {
        throw Error(ErrorCode::kDimensionMismatch, "bad scale subset mask");
      }
    }

    const double mu = d_l.mean();
    if (mu <= 1e-12) {
      throw Error(ErrorCode::kDegenerateDepth, "inverse depth mean is ~0");
    }
    ScalarField n_l = d_l;
    for (double& v : n_l.values()) v /= mu;
    ScalarField nc = n_l;
    for (double& v : nc.values()) v = std::clamp(v, kInvDepthMin, kInvDepthMax);

    const Eigen::Matrix3d ki = k_l.inverse_matrix();
    const Eigen::Matrix3d* emat =
        config.use_epipolar_weight ? &config.epipolar_E->matrix() : nullptr;

    // Pass 1: count valid pixels.
    std::vector<int> row_counts(h, 0);
    parallel_rows(h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        if (subset != nullptr && !subset->at(x, y)) continue;
        const Eigen::Vector3d ray = ki * Eigen::Vector3d(x, y, 1.0);
        const Eigen::Vector3d cam =
            pose.rotation * (ray / nc.at(x, y)) + pose.translation;
        if (cam.z() <= 1e-9) continue;
        const double u = k_l.fx * cam.x() / cam.z() + k_l.cx;
        const double v = k_l.fy * cam.y() / cam.z() + k_l.cy;
        if (u >= 0.0 && u <= w - 1.0 && v >= 0.0 && v <= h - 1.0) {
          ++row_counts[y];
        }
      }
    });
    int n_valid = 0;
    for (int c : row_counts) n_valid += c;

    // Pass 2: photometric term and its gradients.
    double warp_term = 0.0;
    ScalarField g_nc(w, h, 1);
    std::vector<double> row_sums(h, 0.0);
    std::vector<Vector6d> row_pose_grads(h, Vector6d::Zero());
    const double inv_n = n_valid > 0 ? 1.0 / n_valid : 0.0;
    parallel_rows(h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        if (subset != nullptr && !subset->at(x, y)) continue;
        const Eigen::Vector3d ray = ki * Eigen::Vector3d(x, y, 1.0);
        const double ncv = nc.at(x, y);
        const double depth = 1.0 / ncv;
        const Eigen::Vector3d cam = pose.rotation * (depth * ray) + pose.translation;
        const double z = cam.z();
        if (z <= 1e-9) continue;
        const PixelCoord q{k_l.fx * cam.x() / z + k_l.cx,
                           k_l.fy * cam.y() / z + k_l.cy};
        const Sample smp = bilinear_sample(s_l, q);
        if (!smp.in_bounds) continue;

        double err = 0.0;
        for (int c = 0; c < channels; ++c) {
          err += std::abs(t_l.at(x, y, c) - smp.value[c]);
        }
        err /= channels;

        double weight = 1.0;
        double rho = 0.0;
        Eigen::Vector3d line = Eigen::Vector3d::Zero();
        if (emat != nullptr) {
          line = *emat * ray;
          rho = cam.x() / z * line.x() + cam.y() / z * line.y() + line.z();
          weight = std::exp(std::abs(rho));
        }
        row_sums[y] += weight * err;
        if (grads == nullptr) continue;

        const Eigen::Vector3d du_dp(k_l.fx / z, 0.0, -k_l.fx * cam.x() / (z * z));
        const Eigen::Vector3d dv_dp(0.0, k_l.fy / z, -k_l.fy * cam.y() / (z * z));
        Eigen::Vector3d g_cam = Eigen::Vector3d::Zero();
        for (int c = 0; c < channels; ++c) {
          const double sgn = sign(t_l.at(x, y, c) - smp.value[c]);
          const double coeff = inv_n * weight * (-sgn / channels);
          g_cam += coeff * (smp.dx[c] * du_dp + smp.dy[c] * dv_dp);
        }
        if (emat != nullptr && !config.stop_gradient_on_weight) {
          const Eigen::Vector3d drho_dp(
              line.x() / z, line.y() / z,
              -(line.x() * cam.x() + line.y() * cam.y()) / (z * z));
          g_cam += inv_n * err * sign(rho) * weight * drho_dp;
        }
        row_pose_grads[y].head<3>() += cam.cross(g_cam);
        row_pose_grads[y].tail<3>() += g_cam;
        g_nc.at(x, y) += g_cam.dot(pose.rotation * ray) * (-depth * depth);
      }
    });
    for (int y = 0; y < h; ++y) warp_term += row_sums[y];
    warp_term *= inv_n;
    if (n_valid == 0) report.no_valid_pixels = true;
    if (grads != nullptr) {
      for (int y = 0; y < h; ++y) grads->d_pose += row_pose_grads[y];
    }

    // Smoothness on the clamped normalized inverse depth.
    const double lambda = config.lambda_smooth(l);
    const ScalarField gray = to_gray(t_l);
    double smooth_term = 0.0;
    const double inv_total = 1.0 / (static_cast<double>(w) * h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (x + 1 < w) {
          const double dd = nc.at(x + 1, y) - nc.at(x, y);
          const double a = std::exp(-std::abs(gray.at(x + 1, y) - gray.at(x, y)));
          smooth_term += std::abs(dd) * a;
          if (grads != nullptr) {
            const double g = lambda * sign(dd) * a * inv_total;
            g_nc.at(x + 1, y) += g;
            g_nc.at(x, y) -= g;
          }
        }
        if (y + 1 < h) {
          const double dd = nc.at(x, y + 1) - nc.at(x, y);
          const double a = std::exp(-std::abs(gray.at(x, y + 1) - gray.at(x, y)));
          smooth_term += std::abs(dd) * a;
          if (grads != nullptr) {
            const double g = lambda * sign(dd) * a * inv_total;
            g_nc.at(x, y + 1) += g;
            g_nc.at(x, y) -= g;
          }
        }
      }
    }
    smooth_term *= inv_total;

    report.warp_loss.push_back(warp_term);
    report.smooth_loss.push_back(smooth_term);
    report.valid_pixel_counts.push_back(n_valid);
    report.total += warp_term + lambda * smooth_term;

    if (grads != nullptr) {
      // Clamp gate, then unit-mean normalization backprop: n = d / mean(d).
      ScalarField g_n = g_nc;
      double dot = 0.0;
      for (size_t i = 0; i < g_n.values().size(); ++i) {
        if (n_l.values()[i] <= kInvDepthMin || n_l.values()[i] >= kInvDepthMax) {
          g_n.values()[i] = 0.0;
        }
        dot += g_n.values()[i] * n_l.values()[i];
      }
      const double mean_dot = dot / static_cast<double>(g_n.values().size());
      ScalarField g_d(w, h, 1);
      for (size_t i = 0; i < g_d.values().size(); ++i) {
        g_d.values()[i] = (g_n.values()[i] - mean_dot) / mu;
      }
      // Chain back through the box-average pyramid to full resolution.
      for (int lev = l - 1; lev >= 0; --lev) {
        g_d = downsample2_adjoint(g_d, level_dims[lev].first,
                                  level_dims[lev].second);
      }
      for (size_t i = 0; i < g_d.values().size(); ++i) {
        grads->d_inv_depth.values()[i] += g_d.values()[i];
      }
    }
  }
  return report;
}

}  // namespace detail

}  // namespace epivo
