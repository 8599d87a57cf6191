#include "epivo/eval.hpp"

#include <algorithm>
#include <cmath>

namespace epivo {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::pair<double, double> mean_and_population_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / v.size())};
}

}  // namespace

DepthMetrics depth_metrics(const ScalarField& pred, const ScalarField& gt,
                           const ValidityMask& gt_mask, double cap) {
  if (!pred.same_shape(gt) || pred.channels() != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "depth field dimensions differ");
  }
  if (!(cap > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cap must be positive");
  }
  std::vector<double> p_vals;
  std::vector<double> g_vals;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!gt_mask.at(x, y)) continue;
      p_vals.push_back(pred.at(x, y));
      g_vals.push_back(gt.at(x, y));
    }
  }
  if (p_vals.empty()) {
    throw Error(ErrorCode::kEmptyMask, "no valid ground-truth pixels");
  }
  const double scale = median(g_vals) / median(p_vals);

  DepthMetrics m;
  const size_t n = p_vals.size();
  for (size_t i = 0; i < n; ++i) {
    const double p = std::clamp(p_vals[i] * scale, 1e-3, cap);
    const double g = std::clamp(g_vals[i], 1e-3, cap);
    m.abs_rel += std::abs(p - g) / g;
    m.sq_rel += (p - g) * (p - g) / g;
    m.rmse += (p - g) * (p - g);
    m.rmse_log += (std::log(p) - std::log(g)) * (std::log(p) - std::log(g));
    const double ratio = std::max(p / g, g / p);
    if (ratio < 1.25) m.delta1 += 1.0;
    if (ratio < 1.25 * 1.25) m.delta2 += 1.0;
    if (ratio < 1.25 * 1.25 * 1.25) m.delta3 += 1.0;
  }
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.rmse = std::sqrt(m.rmse / n);
  m.rmse_log = std::sqrt(m.rmse_log / n);
  m.delta1 /= n;
  m.delta2 /= n;
  m.delta3 /= n;
  return m;
}

double ate(const TrajectorySnippet& pred, const TrajectorySnippet& gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "snippet lengths differ");
  }
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    num += pred[i].translation.dot(gt[i].translation);
    den += pred[i].translation.squaredNorm();
  }
  if (den < 1e-18) {
    throw Error(ErrorCode::kDegenerateScale, "predicted translations are ~0");
  }
  const double s = num / den;
  double err = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    err += (s * pred[i].translation - gt[i].translation).norm();
  }
  return err / pred.size();
}

double atde(const Eigen::Vector3d& pred_t, const Eigen::Vector3d& gt_t) {
  if (pred_t.norm() < 1e-12 || gt_t.norm() < 1e-12) {
    throw Error(ErrorCode::kZeroTranslation, "translation direction undefined");
  }
  const double d = pred_t.normalized().dot(gt_t.normalized());
  return std::acos(std::clamp(d, -1.0, 1.0));
}

PoseMetrics snippet_metrics(const std::vector<TrajectorySnippet>& pred,
                            const std::vector<TrajectorySnippet>& gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw Error(ErrorCode::kEmptyInput, "snippet counts differ or empty");
  }
  std::vector<double> ates;
  std::vector<double> atdes;
  for (size_t i = 0; i < pred.size(); ++i) {
    ates.push_back(ate(pred[i], gt[i]));
    for (size_t f = 1; f < pred[i].size(); ++f) {
      atdes.push_back(atde(pred[i][f].translation, gt[i][f].translation));
    }
  }
  PoseMetrics m;
  std::tie(m.ate_mean, m.ate_std) = mean_and_population_std(ates);
  std::tie(m.atde_mean, m.atde_std) = mean_and_population_std(atdes);
  return m;
}

std::vector<TrajectorySnippet> split_snippets(const std::vector<Pose>& poses,
                                              int length) {
  if (length < 2) {
    throw Error(ErrorCode::kInvalidArgument, "snippet length must be >= 2");
  }
  std::vector<TrajectorySnippet> out;
  for (size_t start = 0; start + length <= poses.size(); start += length) {
    TrajectorySnippet snip;
    const Pose base_inv = poses[start].inverse();
    for (int i = 0; i < length; ++i) {
      snip.push_back(base_inv.compose(poses[start + i]));
    }
    out.push_back(std::move(snip));
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyInput, "trajectory shorter than one snippet");
  }
  return out;
}

}  // namespace epivo
