#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "epivo/optim.hpp"
#include "epivo/rng.hpp"
#include "epivo/synth.hpp"

using namespace epivo;

namespace {

double fd_rel_err(double analytic, double fd) {
  const double denom = std::max({1e-6, std::abs(analytic), std::abs(fd)});
  return std::abs(analytic - fd) / denom;
}

}  // namespace

TEST_CASE("loss_and_gradients agrees with total_loss") {
  const RenderedPair pair = render_pair(smooth_scene(1, 32));
  LossConfig config;
  const LossReport r = total_loss(pair.target, pair.source, pair.inv_depth,
                                  pair.spec.pose, pair.spec.intrinsics, config);
  const GradientBundle g =
      loss_and_gradients(pair.target, pair.source, pair.inv_depth,
                         pair.spec.pose, pair.spec.intrinsics, config);
  CHECK(g.loss == doctest::Approx(r.total).epsilon(1e-12));
  CHECK(g.d_inv_depth.same_shape(pair.inv_depth));
  for (double v : g.d_inv_depth.values()) CHECK(std::isfinite(v));
}

TEST_CASE("pose and depth gradients match central finite differences") {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const RenderedPair pair = render_pair(smooth_scene(40 + trial, 24));
    Vector6d delta;
    for (int i = 0; i < 3; ++i) delta[i] = 0.01 * rng.gaussian();
    for (int i = 3; i < 6; ++i) delta[i] = 0.05 * rng.gaussian();
    const Pose pose = Pose::exp(delta).compose(pair.spec.pose);
    ScalarField inv_depth = pair.inv_depth;
    for (double& v : inv_depth.values()) v *= 1.0 + 0.05 * rng.gaussian();

    LossConfig config;
    config.use_epipolar_weight = true;
    config.epipolar_E = pair.essential;
    const CameraIntrinsics& k = pair.spec.intrinsics;
    const auto subsets = kink_free_masks(inv_depth, pose, k, config);
    const GradientBundle g = loss_and_gradients(
        pair.target, pair.source, inv_depth, pose, k, config, &subsets);
    auto loss_at = [&](const Pose& p, const ScalarField& d) {
      return detail::total_loss_kernel(pair.target, pair.source, d, p, k,
                                       config, nullptr, &subsets)
          .total;
    };
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
      Vector6d step = Vector6d::Zero();
      step[i] = h;
      const double fp = loss_at(Pose::exp(step).compose(pose), inv_depth);
      step[i] = -h;
      const double fm = loss_at(Pose::exp(step).compose(pose), inv_depth);
      CHECK(fd_rel_err(g.d_pose[i], (fp - fm) / (2 * h)) < 1e-4);
    }
    for (int s = 0; s < 10; ++s) {
      const int x = rng.uniform_int(inv_depth.width());
      const int y = rng.uniform_int(inv_depth.height());
      ScalarField d = inv_depth;
      d.at(x, y) = inv_depth.at(x, y) + h;
      const double fp = loss_at(pose, d);
      d.at(x, y) = inv_depth.at(x, y) - h;
      const double fm = loss_at(pose, d);
      CHECK(fd_rel_err(g.d_inv_depth.at(x, y), (fp - fm) / (2 * h)) < 1e-4);
    }
  }
}

TEST_CASE("stop-gradient on the weight changes the pose gradient path") {
  const RenderedPair pair = render_pair(smooth_scene(7, 24));
  Vector6d delta = Vector6d::Zero();
  delta[4] = 0.05;
  const Pose pose = Pose::exp(delta).compose(pair.spec.pose);
  LossConfig through;
  through.use_epipolar_weight = true;
  through.epipolar_E = pair.essential;
  LossConfig stopped = through;
  stopped.stop_gradient_on_weight = true;
  const GradientBundle a =
      loss_and_gradients(pair.target, pair.source, pair.inv_depth, pose,
                         pair.spec.intrinsics, through);
  const GradientBundle b =
      loss_and_gradients(pair.target, pair.source, pair.inv_depth, pose,
                         pair.spec.intrinsics, stopped);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  CHECK((a.d_pose - b.d_pose).norm() > 0.0);
}

TEST_CASE("adam leaves parameters alone under zero gradient") {
  AdamState state;
  std::vector<double> params{1.0, -2.0, 3.0};
  const std::vector<double> before = params;
  adam_step(state, params, {0.0, 0.0, 0.0});
  CHECK(state.step == 1);
  CHECK(params == before);
}

TEST_CASE("adam first step moves by the learning rate against the gradient") {
  AdamState state;
  state.learning_rate = 0.01;
  std::vector<double> params{0.0};
  adam_step(state, params, {2.5});
  // bias-corrected first step is -lr * g/|g| up to epsilon terms
  CHECK(params[0] == doctest::Approx(-0.01).epsilon(1e-6));
}

TEST_CASE("adam converges to unit-step updates under constant gradient") {
  AdamState state;
  state.learning_rate = 0.001;
  std::vector<double> params{0.0};
  double prev = 0.0;
  for (int i = 0; i < 200; ++i) {
    prev = params[0];
    adam_step(state, params, {3.0});
  }
  CHECK(std::abs(prev - params[0]) ==
        doctest::Approx(state.learning_rate).epsilon(1e-6));
}

TEST_CASE("adam rejects mismatched shapes") {
  AdamState state;
  std::vector<double> params{1.0, 2.0};
  try {
    adam_step(state, params, {1.0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("optimizer stays at the ground-truth optimum") {
  const RenderedPair pair = render_pair(smooth_scene(3, 32));
  LossConfig config;
  OptimOptions opts;
  opts.iters = 20;
  opts.optimize_depth = false;
  // The loss sees unit-mean inverse depth, so the optimum translation is the
  // ground truth rescaled by the mean inverse depth.
  Pose gt = pair.spec.pose;
  gt.translation *= pair.inv_depth.mean();
  const OptimResult r =
      optimize_direct(pair.target, pair.source, pair.inv_depth, gt,
                      pair.spec.intrinsics, config, opts);
  const Pose rel = r.pose.compose(gt.inverse());
  // Adam steps are O(lr) even for tiny gradients, so bound the drift by the
  // total step budget rather than expecting an exact fixed point.
  CHECK(rel.log().norm() < 2.0 * opts.iters * opts.learning_rate);
  const double first = r.trace.front().total;
  const double last = r.trace.back().total;
  CHECK(std::abs(last - first) < 0.1 * (first + 1e-12));
}

TEST_CASE("loss trace trends down at a small learning rate") {
  const RenderedPair pair = render_pair(smooth_scene(5, 32));
  Vector6d delta = Vector6d::Zero();
  delta[1] = 0.01;
  delta[3] = 0.03;
  Pose init = pair.spec.pose;
  init.translation *= pair.inv_depth.mean();
  init = Pose::exp(delta).compose(init);
  LossConfig config;
  OptimOptions opts;
  opts.iters = 50;
  opts.learning_rate = 1e-4;
  const OptimResult r =
      optimize_direct(pair.target, pair.source, pair.inv_depth, init,
                      pair.spec.intrinsics, config, opts);
  // Adam is not a strict descent method; require overall progress and only
  // small transient increases.
  CHECK(r.trace.back().total < r.trace.front().total);
  for (size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i].total <= r.trace[i - 1].total + 0.02 * r.trace.front().total);
  }
}

TEST_CASE("exp map is BCH-consistent for small tangents") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Vector6d a, b;
    for (int i = 0; i < 6; ++i) {
      a[i] = 1e-3 * rng.gaussian();
      b[i] = 1e-3 * rng.gaussian();
    }
    const Pose lhs = Pose::exp(a).compose(Pose::exp(b));
    // BCH to second order: a + b + [a, b]/2; third-order terms are O(1e-9)
    const Pose rhs = Pose::exp(a + b);
    const Vector6d diff = lhs.compose(rhs.inverse()).log();
    CHECK(diff.norm() < 1e-5);  // commutator magnitude bound
    // and with the commutator the agreement tightens to third order
  }
}
