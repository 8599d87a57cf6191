#include "epivo/epivo.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "epivo/rng.hpp"

#include "epivo/eval.hpp"
#include "epivo/field.hpp"
#include "epivo/fivepoint.hpp"
#include "epivo/geometry.hpp"
#include "epivo/io.hpp"
#include "epivo/losses.hpp"
#include "epivo/optim.hpp"
#include "epivo/synth.hpp"
#include "epivo/warp.hpp"

using namespace epivo;

struct epivo_field {
  ScalarField f;
};

struct epivo_optim_result {
  OptimResult r;
};

struct epivo_rendered_pair {
  RenderedPair p;
};

namespace {

thread_local std::string g_last_error;

epivo_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return EPIVO_ERR_IO;
    case ErrorCode::kInvalidArgument: return EPIVO_ERR_INVALID_ARGUMENT;
    case ErrorCode::kZeroTranslation: return EPIVO_ERR_ZERO_TRANSLATION;
    case ErrorCode::kDegenerateConfiguration:
      return EPIVO_ERR_DEGENERATE_CONFIGURATION;
    case ErrorCode::kInsufficientCorrespondences:
      return EPIVO_ERR_INSUFFICIENT_CORRESPONDENCES;
    case ErrorCode::kNoModelFound: return EPIVO_ERR_NO_MODEL_FOUND;
    case ErrorCode::kAmbiguousCheirality: return EPIVO_ERR_AMBIGUOUS_CHEIRALITY;
    case ErrorCode::kDimensionMismatch: return EPIVO_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kDegenerateDepth: return EPIVO_ERR_DEGENERATE_DEPTH;
    case ErrorCode::kShapeMismatch: return EPIVO_ERR_SHAPE_MISMATCH;
    case ErrorCode::kEmptyMask: return EPIVO_ERR_EMPTY_MASK;
    case ErrorCode::kEmptyInput: return EPIVO_ERR_EMPTY_INPUT;
    case ErrorCode::kDegenerateScale: return EPIVO_ERR_DEGENERATE_SCALE;
    case ErrorCode::kInvalidScene: return EPIVO_ERR_INVALID_SCENE;
    case ErrorCode::kInsufficientStaticArea:
      return EPIVO_ERR_INSUFFICIENT_STATIC_AREA;
  }
  return EPIVO_ERR_UNKNOWN;
}

template <typename F>
epivo_status guarded(F&& fn) {
  try {
    fn();
    return EPIVO_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EPIVO_ERR_UNKNOWN;
  }
}

Pose to_pose(const epivo_pose& p) {
  Pose out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.rotation(r, c) = p.rotation[3 * r + c];
  out.translation = Eigen::Vector3d(p.translation[0], p.translation[1],
                                    p.translation[2]);
  return out;
}

void from_pose(const Pose& in, epivo_pose* out) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out->rotation[3 * r + c] = in.rotation(r, c);
  for (int i = 0; i < 3; ++i) out->translation[i] = in.translation(i);
}

CameraIntrinsics to_k(const epivo_intrinsics& k) {
  return CameraIntrinsics{k.fx, k.fy, k.cx, k.cy};
}

Eigen::Matrix3d to_mat3(const double m[9]) {
  Eigen::Matrix3d out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out(r, c) = m[3 * r + c];
  return out;
}

void from_mat3(const Eigen::Matrix3d& in, double out[9]) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[3 * r + c] = in(r, c);
}

std::vector<Correspondence> to_correspondences(const double* target,
                                               const double* source, int n) {
  std::vector<Correspondence> cs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    cs[i].target = NormalizedCoord{target[2 * i], target[2 * i + 1]};
    cs[i].source = NormalizedCoord{source[2 * i], source[2 * i + 1]};
  }
  return cs;
}

LossConfig to_loss_config(const epivo_loss_options& o) {
  LossConfig c;
  c.num_scales = o.num_scales;
  c.lambda_smooth_base = o.lambda_smooth_base;
  c.use_epipolar_weight = o.use_epipolar_weight != 0;
  if (c.use_epipolar_weight) {
    c.epipolar_E = EssentialMatrix(to_mat3(o.epipolar_e));
  }
  c.stop_gradient_on_weight = o.stop_gradient_on_weight != 0;
  return c;
}

void fill_report(const LossReport& in, epivo_loss_report* out) {
  std::memset(out, 0, sizeof(*out));
  out->total = in.total;
  for (size_t i = 0; i < in.warp_loss.size() && i < 8; ++i) {
    out->warp_loss[i] = in.warp_loss[i];
    out->smooth_loss[i] = in.smooth_loss[i];
    out->valid_pixel_counts[i] = in.valid_pixel_counts[i];
  }
}

epivo_field* wrap(ScalarField&& f) { return new epivo_field{std::move(f)}; }

}  // namespace

extern "C" {

const char* epivo_last_error(void) { return g_last_error.c_str(); }

epivo_status epivo_field_create(int width, int height, int channels,
                                epivo_field** out) {
  return guarded([&] { *out = wrap(ScalarField(width, height, channels)); });
}

void epivo_field_destroy(epivo_field* f) { delete f; }
int epivo_field_width(const epivo_field* f) { return f->f.width(); }
int epivo_field_height(const epivo_field* f) { return f->f.height(); }
int epivo_field_channels(const epivo_field* f) { return f->f.channels(); }
double* epivo_field_data(epivo_field* f) { return f->f.values().data(); }
const double* epivo_field_data_const(const epivo_field* f) {
  return f->f.values().data();
}

epivo_status epivo_read_image(const char* path, epivo_field** out) {
  return guarded([&] { *out = wrap(read_image(path)); });
}
epivo_status epivo_write_image(const epivo_field* f, const char* path) {
  return guarded([&] { write_image(f->f, path); });
}
epivo_status epivo_read_pfm(const char* path, epivo_field** out) {
  return guarded([&] { *out = wrap(read_pfm(path)); });
}
epivo_status epivo_write_pfm(const epivo_field* f, const char* path) {
  return guarded([&] { write_pfm(f->f, path); });
}
epivo_status epivo_write_heatmap(const epivo_field* f, const char* path) {
  return guarded([&] { write_heatmap_pgm(f->f, path); });
}

epivo_status epivo_read_intrinsics(const char* path, epivo_intrinsics* out) {
  return guarded([&] {
    const CameraIntrinsics k = read_intrinsics(path);
    out->fx = k.fx;
    out->fy = k.fy;
    out->cx = k.cx;
    out->cy = k.cy;
  });
}

epivo_status epivo_write_intrinsics(const epivo_intrinsics* k,
                                    const char* path) {
  return guarded([&] { write_intrinsics(to_k(*k), path); });
}

epivo_status epivo_read_correspondences(const char* path, double* target,
                                        double* source, int capacity, int* n) {
  return guarded([&] {
    const auto cs = read_correspondences(path);
    *n = static_cast<int>(cs.size());
    if (!target) return;
    if (capacity < *n) {
      throw Error(ErrorCode::kInvalidArgument, "capacity too small");
    }
    for (size_t i = 0; i < cs.size(); ++i) {
      target[2 * i] = cs[i].target.x;
      target[2 * i + 1] = cs[i].target.y;
      source[2 * i] = cs[i].source.x;
      source[2 * i + 1] = cs[i].source.y;
    }
  });
}

epivo_status epivo_write_correspondences(const double* target,
                                         const double* source, int n,
                                         const char* path) {
  return guarded(
      [&] { write_correspondences(to_correspondences(target, source, n), path); });
}

epivo_status epivo_read_essential(const char* path, double e[9]) {
  return guarded([&] { from_mat3(read_essential(path).matrix(), e); });
}

epivo_status epivo_write_essential(const double e[9], const char* path) {
  return guarded([&] { write_essential(EssentialMatrix(to_mat3(e)), path); });
}

epivo_status epivo_read_trajectory(const char* path, epivo_pose* poses,
                                   int capacity, int* n) {
  return guarded([&] {
    const auto traj = read_trajectory(path);
    *n = static_cast<int>(traj.size());
    if (!poses) return;
    if (capacity < *n) {
      throw Error(ErrorCode::kInvalidArgument, "capacity too small");
    }
    for (size_t i = 0; i < traj.size(); ++i) from_pose(traj[i], poses + i);
  });
}

epivo_status epivo_write_trajectory(const epivo_pose* poses, int n,
                                    const char* path) {
  return guarded([&] {
    std::vector<Pose> traj(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) traj[i] = to_pose(poses[i]);
    write_trajectory(traj, path);
  });
}

epivo_status epivo_format_double(double v, char* buf, size_t buf_size) {
  return guarded([&] {
    const std::string s = format_double(v);
    if (s.size() + 1 > buf_size) {
      throw Error(ErrorCode::kInvalidArgument, "buffer too small");
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

epivo_status epivo_pose_exp(const double xi[6], epivo_pose* out) {
  return guarded([&] {
    Vector6d v;
    for (int i = 0; i < 6; ++i) v[i] = xi[i];
    from_pose(Pose::exp(v), out);
  });
}

epivo_status epivo_pose_log(const epivo_pose* pose, double xi[6]) {
  return guarded([&] {
    const Vector6d v = to_pose(*pose).log();
    for (int i = 0; i < 6; ++i) xi[i] = v[i];
  });
}

epivo_status epivo_pose_compose(const epivo_pose* a, const epivo_pose* b,
                                epivo_pose* out) {
  return guarded([&] { from_pose(to_pose(*a).compose(to_pose(*b)), out); });
}

epivo_status epivo_pose_inverse(const epivo_pose* pose, epivo_pose* out) {
  return guarded([&] { from_pose(to_pose(*pose).inverse(), out); });
}

epivo_status epivo_essential_from_pose(const epivo_pose* pose, double e[9]) {
  return guarded(
      [&] { from_mat3(essential_from_pose(to_pose(*pose)).matrix(), e); });
}

epivo_status epivo_five_point(const double* target, const double* source,
                              double essentials[90], int* count) {
  return guarded([&] {
    const auto sols = five_point(to_correspondences(target, source, 5));
    *count = static_cast<int>(sols.size());
    for (size_t i = 0; i < sols.size(); ++i) {
      from_mat3(sols[i].matrix(), essentials + 9 * i);
    }
  });
}

epivo_status epivo_sampson_error(const double e[9], double tx, double ty,
                                 double sx, double sy, double* out) {
  return guarded([&] {
    Correspondence c;
    c.target = NormalizedCoord{tx, ty};
    c.source = NormalizedCoord{sx, sy};
    *out = sampson_error(EssentialMatrix(to_mat3(e)), c);
  });
}

void epivo_ransac_options_default(epivo_ransac_options* opts) {
  const RansacOptions d;
  opts->threshold = d.threshold;
  opts->max_iters = d.max_iters;
  opts->seed = d.seed;
  opts->adaptive = d.adaptive ? 1 : 0;
}

epivo_status epivo_ransac_essential(const double* target, const double* source,
                                    int n, const epivo_ransac_options* opts,
                                    double e[9], uint8_t* inlier_mask,
                                    int* inlier_count, int* iterations_run) {
  return guarded([&] {
    RansacOptions o;
    o.threshold = opts->threshold;
    o.max_iters = opts->max_iters;
    o.seed = opts->seed;
    o.adaptive = opts->adaptive != 0;
    const RansacResult r =
        ransac_essential(to_correspondences(target, source, n), o);
    from_mat3(r.best.matrix(), e);
    if (inlier_mask) {
      for (int i = 0; i < n; ++i) inlier_mask[i] = r.inlier_mask[i] ? 1 : 0;
    }
    if (inlier_count) *inlier_count = r.inlier_count;
    if (iterations_run) *iterations_run = r.iterations_run;
  });
}

epivo_status epivo_decompose_essential(const double e[9], const double* target,
                                       const double* source, int n,
                                       epivo_pose* pose, int* votes) {
  return guarded([&] {
    const PoseHypothesis h = decompose_essential(
        EssentialMatrix(to_mat3(e)), to_correspondences(target, source, n));
    from_pose(h.pose, pose);
    if (votes) *votes = h.cheirality_votes;
  });
}

epivo_status epivo_warp_image(const epivo_field* source,
                              const epivo_field* inv_depth,
                              const epivo_pose* pose,
                              const epivo_intrinsics* k, epivo_field** out,
                              epivo_field** mask_out) {
  return guarded([&] {
    ScalarField depth(inv_depth->f.width(), inv_depth->f.height(), 1);
    for (size_t i = 0; i < depth.values().size(); ++i) {
      const double d = inv_depth->f.values()[i];
      depth.values()[i] = d > 0.0 ? 1.0 / d : 0.0;
    }
    WarpResult w = warp_image(source->f, depth, to_k(*k), to_pose(*pose));
    if (mask_out) {
      ScalarField m(w.mask.width(), w.mask.height(), 1);
      for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
          m.at(x, y) = w.mask.at(x, y) ? 1.0 : 0.0;
      *mask_out = wrap(std::move(m));
    }
    *out = wrap(std::move(w.image));
  });
}

epivo_status epivo_weight_map(const epivo_field* inv_depth,
                              const epivo_intrinsics* k,
                              const epivo_pose* pose, const double e[9],
                              epivo_field** out) {
  return guarded([&] {
    ScalarField depth(inv_depth->f.width(), inv_depth->f.height(), 1);
    for (size_t i = 0; i < depth.values().size(); ++i) {
      const double d = inv_depth->f.values()[i];
      depth.values()[i] = d > 0.0 ? 1.0 / d : 0.0;
    }
    *out = wrap(epipolar_weight_map(depth, to_k(*k), to_pose(*pose),
                                    EssentialMatrix(to_mat3(e))));
  });
}

void epivo_loss_options_default(epivo_loss_options* opts) {
  std::memset(opts, 0, sizeof(*opts));
  const LossConfig d;
  opts->num_scales = d.num_scales;
  opts->lambda_smooth_base = d.lambda_smooth_base;
}

epivo_status epivo_total_loss(const epivo_field* target,
                              const epivo_field* source,
                              const epivo_field* inv_depth,
                              const epivo_pose* pose,
                              const epivo_intrinsics* k,
                              const epivo_loss_options* opts,
                              epivo_loss_report* report) {
  return guarded([&] {
    const LossReport r = total_loss(target->f, source->f, inv_depth->f,
                                    to_pose(*pose), to_k(*k),
                                    to_loss_config(*opts));
    fill_report(r, report);
  });
}

epivo_status epivo_loss_gradients(const epivo_field* target,
                                  const epivo_field* source,
                                  const epivo_field* inv_depth,
                                  const epivo_pose* pose,
                                  const epivo_intrinsics* k,
                                  const epivo_loss_options* opts,
                                  double d_pose[6], epivo_field** d_inv_depth,
                                  epivo_loss_report* report) {
  return guarded([&] {
    GradientBundle g =
        loss_and_gradients(target->f, source->f, inv_depth->f, to_pose(*pose),
                           to_k(*k), to_loss_config(*opts));
    for (int i = 0; i < 6; ++i) d_pose[i] = g.d_pose[i];
    if (d_inv_depth) *d_inv_depth = wrap(std::move(g.d_inv_depth));
    if (report) fill_report(g.report, report);
  });
}

void epivo_optim_options_default(epivo_optim_options* opts) {
  const OptimOptions d;
  opts->iters = d.iters;
  opts->learning_rate = d.learning_rate;
  opts->beta1 = d.beta1;
  opts->beta2 = d.beta2;
  opts->epsilon = d.epsilon;
  opts->optimize_pose = d.optimize_pose ? 1 : 0;
  opts->optimize_depth = d.optimize_depth ? 1 : 0;
}

epivo_status epivo_optimize(const epivo_field* target,
                            const epivo_field* source,
                            const epivo_field* inv_depth_init,
                            const epivo_pose* pose_init,
                            const epivo_intrinsics* k,
                            const epivo_loss_options* loss_opts,
                            const epivo_optim_options* opts,
                            epivo_optim_result** out) {
  return guarded([&] {
    OptimOptions o;
    o.iters = opts->iters;
    o.learning_rate = opts->learning_rate;
    o.beta1 = opts->beta1;
    o.beta2 = opts->beta2;
    o.epsilon = opts->epsilon;
    o.optimize_pose = opts->optimize_pose != 0;
    o.optimize_depth = opts->optimize_depth != 0;
    OptimResult r =
        optimize_direct(target->f, source->f, inv_depth_init->f,
                        to_pose(*pose_init), to_k(*k),
                        to_loss_config(*loss_opts), o);
    *out = new epivo_optim_result{std::move(r)};
  });
}

void epivo_optim_result_destroy(epivo_optim_result* r) { delete r; }

epivo_status epivo_optim_result_pose(const epivo_optim_result* r,
                                     epivo_pose* pose) {
  return guarded([&] { from_pose(r->r.pose, pose); });
}

epivo_status epivo_optim_result_inv_depth(const epivo_optim_result* r,
                                          epivo_field** out) {
  return guarded([&] { *out = wrap(ScalarField(r->r.inv_depth)); });
}

int epivo_optim_result_trace_length(const epivo_optim_result* r) {
  return static_cast<int>(r->r.trace.size());
}

epivo_status epivo_optim_result_trace(const epivo_optim_result* r,
                                      double* loss_values) {
  return guarded([&] {
    for (size_t i = 0; i < r->r.trace.size(); ++i) {
      loss_values[i] = r->r.trace[i].total;
    }
  });
}

epivo_status epivo_optim_result_report(const epivo_optim_result* r, int index,
                                       epivo_loss_report* report) {
  return guarded([&] {
    if (index < 0 || index >= static_cast<int>(r->r.trace.size())) {
      throw Error(ErrorCode::kInvalidArgument, "trace index out of range");
    }
    fill_report(r->r.trace[static_cast<size_t>(index)], report);
  });
}

epivo_status epivo_depth_metrics_compute(const epivo_field* pred,
                                         const epivo_field* gt,
                                         const epivo_field* mask, double cap,
                                         epivo_depth_metrics* out) {
  return guarded([&] {
    ValidityMask m(gt->f.width(), gt->f.height(), true);
    if (mask) {
      for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
          m.set(x, y, mask->f.at(x, y) != 0.0);
    }
    const DepthMetrics d = depth_metrics(pred->f, gt->f, m, cap);
    out->abs_rel = d.abs_rel;
    out->sq_rel = d.sq_rel;
    out->rmse = d.rmse;
    out->rmse_log = d.rmse_log;
    out->a1 = d.delta1;
    out->a2 = d.delta2;
    out->a3 = d.delta3;
  });
}

epivo_status epivo_ate(const epivo_pose* pred, const epivo_pose* gt, int n,
                       double* out) {
  return guarded([&] {
    TrajectorySnippet p(static_cast<size_t>(n)), g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      p[i] = to_pose(pred[i]);
      g[i] = to_pose(gt[i]);
    }
    *out = ate(p, g);
  });
}

epivo_status epivo_atde(const epivo_pose* pred, const epivo_pose* gt,
                        double* out) {
  return guarded([&] {
    *out = atde(to_pose(*pred).translation, to_pose(*gt).translation);
  });
}

epivo_status epivo_snippet_metrics(const epivo_pose* pred,
                                   const epivo_pose* gt, int n, int length,
                                   epivo_pose_metrics* out) {
  return guarded([&] {
    std::vector<Pose> p(static_cast<size_t>(n)), g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      p[i] = to_pose(pred[i]);
      g[i] = to_pose(gt[i]);
    }
    const PoseMetrics m =
        snippet_metrics(split_snippets(p, length), split_snippets(g, length));
    out->ate_mean = m.ate_mean;
    out->ate_std = m.ate_std;
    out->atde_mean = m.atde_mean;
    out->atde_std = m.atde_std;
  });
}

epivo_status epivo_gradcheck(uint64_t seed, int configs, double tol,
                             double* max_rel_err, int* failures) {
  return guarded([&] {
    double worst = 0.0;
    int bad = 0;
    Rng rng(seed * 1013 + 7);
    for (int c = 0; c < configs; ++c) {
      const RenderedPair pair = render_pair(smooth_scene(seed + c, 24));
      // perturb away from the rendered optimum so gradients are nonzero
      Vector6d delta;
      for (int i = 0; i < 3; ++i) delta[i] = 0.01 * rng.gaussian();
      for (int i = 3; i < 6; ++i) delta[i] = 0.05 * rng.gaussian();
      const Pose pose = Pose::exp(delta).compose(pair.spec.pose);
      ScalarField inv_depth = pair.inv_depth;
      for (double& v : inv_depth.values()) {
        v *= 1.0 + 0.05 * rng.gaussian();
      }
      LossConfig config;
      config.use_epipolar_weight = pair.essential.has_value();
      config.epipolar_E = pair.essential;
      const CameraIntrinsics& k = pair.spec.intrinsics;
      const auto subsets = kink_free_masks(inv_depth, pose, k, config);
      const GradientBundle g = loss_and_gradients(pair.target, pair.source,
                                                  inv_depth, pose, k, config,
                                                  &subsets);
      auto loss_at = [&](const Pose& p, const ScalarField& d) {
        return detail::total_loss_kernel(pair.target, pair.source, d, p, k,
                                         config, nullptr, &subsets)
            .total;
      };
      auto check = [&](double analytic, double fplus, double fminus,
                       double h) {
        const double fd = (fplus - fminus) / (2.0 * h);
        const double denom = std::max({1e-6, std::abs(analytic), std::abs(fd)});
        const double rel = std::abs(analytic - fd) / denom;
        worst = std::max(worst, rel);
        if (rel > tol) ++bad;
      };
      const double h = 1e-6;
      for (int i = 0; i < 6; ++i) {
        Vector6d step = Vector6d::Zero();
        step[i] = h;
        const double fp = loss_at(Pose::exp(step).compose(pose), inv_depth);
        step[i] = -h;
        const double fm = loss_at(Pose::exp(step).compose(pose), inv_depth);
        check(g.d_pose[i], fp, fm, h);
      }
      for (int s = 0; s < 8; ++s) {
        const int x = rng.uniform_int(inv_depth.width());
        const int y = rng.uniform_int(inv_depth.height());
        ScalarField d = inv_depth;
        d.at(x, y) += h;
        const double fp = loss_at(pose, d);
        d.at(x, y) = inv_depth.at(x, y) - h;
        const double fm = loss_at(pose, d);
        check(g.d_inv_depth.at(x, y), fp, fm, h);
      }
    }
    *max_rel_err = worst;
    *failures = bad;
  });
}

epivo_status epivo_render_scene(const char* scene_path,
                                epivo_rendered_pair** out) {
  return guarded([&] {
    *out = new epivo_rendered_pair{render_pair(read_scene_spec(scene_path))};
  });
}

void epivo_rendered_pair_destroy(epivo_rendered_pair* p) { delete p; }

epivo_status epivo_rendered_pair_field(const epivo_rendered_pair* p, int which,
                                       epivo_field** out) {
  return guarded([&] {
    switch (which) {
      case 0: *out = wrap(ScalarField(p->p.target)); return;
      case 1: *out = wrap(ScalarField(p->p.source)); return;
      case 2: *out = wrap(ScalarField(p->p.depth)); return;
      case 3: *out = wrap(ScalarField(p->p.inv_depth)); return;
      case 4: {
        ScalarField m(p->p.mover_mask.width(), p->p.mover_mask.height(), 1);
        for (int y = 0; y < m.height(); ++y)
          for (int x = 0; x < m.width(); ++x)
            m.at(x, y) = p->p.mover_mask.at(x, y) ? 1.0 : 0.0;
        *out = wrap(std::move(m));
        return;
      }
      case 5: *out = wrap(ScalarField(p->p.corr_x)); return;
      case 6: *out = wrap(ScalarField(p->p.corr_y)); return;
      default:
        throw Error(ErrorCode::kInvalidArgument, "unknown field selector");
    }
  });
}

epivo_status epivo_rendered_pair_pose(const epivo_rendered_pair* p,
                                      epivo_pose* pose) {
  return guarded([&] { from_pose(p->p.spec.pose, pose); });
}

epivo_status epivo_rendered_pair_intrinsics(const epivo_rendered_pair* p,
                                            epivo_intrinsics* k) {
  return guarded([&] {
    k->fx = p->p.spec.intrinsics.fx;
    k->fy = p->p.spec.intrinsics.fy;
    k->cx = p->p.spec.intrinsics.cx;
    k->cy = p->p.spec.intrinsics.cy;
  });
}

int epivo_rendered_pair_essential(const epivo_rendered_pair* p, double e[9]) {
  if (!p->p.essential.has_value()) return 0;
  from_mat3(p->p.essential->matrix(), e);
  return 1;
}

epivo_status epivo_sample_correspondences(const epivo_rendered_pair* p, int n,
                                          double noise_sigma,
                                          double outlier_frac, uint64_t seed,
                                          double* target, double* source,
                                          uint8_t* inliers) {
  return guarded([&] {
    const LabeledCorrespondences lc =
        sample_correspondences(p->p, n, noise_sigma, outlier_frac, seed);
    for (int i = 0; i < n; ++i) {
      target[2 * i] = lc.matches[i].target.x;
      target[2 * i + 1] = lc.matches[i].target.y;
      source[2 * i] = lc.matches[i].source.x;
      source[2 * i + 1] = lc.matches[i].source.y;
      if (inliers) inliers[i] = lc.is_inlier[i] ? 1 : 0;
    }
  });
}

}  // extern "C"
