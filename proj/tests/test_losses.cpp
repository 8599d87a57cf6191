#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "epivo/losses.hpp"
#include "epivo/rng.hpp"
#include "epivo/synth.hpp"
#include "epivo/warp.hpp"

using namespace epivo;

TEST_CASE("photometric loss on constant fields") {
  ScalarField a(4, 4, 1, 0.25), b(4, 4, 1, 0.75);
  ValidityMask mask(4, 4, true);
  CHECK(photometric_loss(a, a, mask) == 0.0);
  CHECK(photometric_loss(a, b, mask) == doctest::Approx(0.5));
}

TEST_CASE("photometric loss matches a reference loop on half-valid input") {
  Rng rng(1);
  ScalarField a(4, 4, 1), b(4, 4, 1);
  for (double& v : a.values()) v = rng.uniform(0.0, 1.0);
  for (double& v : b.values()) v = rng.uniform(0.0, 1.0);
  ValidityMask mask(4, 4, false);
  double sum = 0.0;
  int n = 0;
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      if ((x + y) % 2 == 0) {
        mask.set(x, y, true);
        sum += std::abs(a.at(x, y) - b.at(x, y));
        ++n;
      }
    }
  }
  CHECK(photometric_loss(a, b, mask) == doctest::Approx(sum / n).epsilon(1e-15));
}

TEST_CASE("empty mask yields zero with a warning flag") {
  ScalarField a(2, 2, 1, 0.1), b(2, 2, 1, 0.9);
  ValidityMask mask(2, 2, false);
  bool warn = false;
  CHECK(photometric_loss(a, b, mask, &warn) == 0.0);
  CHECK(warn);
}

TEST_CASE("weight map is one when E matches the pose and depth") {
  const RenderedPair pair = render_pair(smooth_scene(2, 32));
  REQUIRE(pair.essential.has_value());
  const ScalarField w = epipolar_weight_map(pair.depth, pair.spec.intrinsics,
                                            pair.spec.pose, *pair.essential);
  double max_dev = 0.0;
  for (double v : w.values()) max_dev = std::max(max_dev, std::abs(v - 1.0));
  CHECK(max_dev < 1e-6);
}

TEST_CASE("perturbed pose produces weights at least one") {
  const RenderedPair pair = render_pair(smooth_scene(4, 32));
  Pose perturbed = pair.spec.pose;
  perturbed.translation.y() += 0.05;
  const ScalarField w = epipolar_weight_map(pair.depth, pair.spec.intrinsics,
                                            perturbed, *pair.essential);
  double max_w = 0.0;
  for (double v : w.values()) {
    CHECK(v >= 1.0);
    max_w = std::max(max_w, v);
  }
  CHECK(max_w > 1.0);
}

TEST_CASE("mover pixels get larger weights from the true match grid") {
  const RenderedPair pair = render_pair(mover_scene(5, 0.08));
  REQUIRE(pair.essential.has_value());
  REQUIRE(pair.mover_mask.count() > 20);
  const ScalarField w = epipolar_weight_map_from_matches(
      pair.corr_x, pair.corr_y, pair.spec.intrinsics, *pair.essential);
  std::vector<double> inside, outside;
  for (int y = 0; y < w.height(); ++y) {
    for (int x = 0; x < w.width(); ++x) {
      (pair.mover_mask.at(x, y) ? inside : outside).push_back(w.at(x, y));
    }
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  CHECK(median(inside) > median(outside));
}

TEST_CASE("weighted loss reduces to the plain loss for unit weights") {
  Rng rng(7);
  ScalarField a(5, 5, 1), b(5, 5, 1);
  for (double& v : a.values()) v = rng.uniform(0.0, 1.0);
  for (double& v : b.values()) v = rng.uniform(0.0, 1.0);
  ValidityMask mask(5, 5, true);
  ScalarField w(5, 5, 1, 1.0);
  CHECK(weighted_photometric_loss(a, b, mask, w) ==
        doctest::Approx(photometric_loss(a, b, mask)).epsilon(1e-15));
  // doubling one pixel's weight adds exactly its contribution once more
  const double base = weighted_photometric_loss(a, b, mask, w);
  w.at(2, 2) = 2.0;
  const double boosted = weighted_photometric_loss(a, b, mask, w);
  CHECK(boosted - base ==
        doctest::Approx(std::abs(a.at(2, 2) - b.at(2, 2)) / 25.0).epsilon(1e-12));
}

TEST_CASE("smoothness loss on steps follows the edge-aware formula") {
  // two-column field: inverse depth steps by 1, image steps by G
  const double g = 0.5;
  ScalarField inv(2, 3, 1), img(2, 3, 1);
  for (int y = 0; y < 3; ++y) {
    inv.at(0, y) = 1.0;
    inv.at(1, y) = 2.0;
    img.at(0, y) = 0.0;
    img.at(1, y) = g;
  }
  // only the left column contributes a forward difference
  const double expect = 3.0 * std::exp(-g) / 6.0;
  CHECK(smoothness_loss(inv, img) == doctest::Approx(expect).epsilon(1e-12));
  // flat image: larger penalty
  ScalarField flat(2, 3, 1, 0.3);
  CHECK(smoothness_loss(inv, flat) == doctest::Approx(3.0 / 6.0).epsilon(1e-12));
  CHECK(smoothness_loss(inv, flat) > smoothness_loss(inv, img));
  // constant inverse depth: zero
  ScalarField constant(2, 3, 1, 0.7);
  CHECK(smoothness_loss(constant, img) == 0.0);
}

TEST_CASE("normalize_inverse_depth produces unit mean") {
  ScalarField f(2, 1, 1);
  f.at(0, 0) = 1.0;
  f.at(1, 0) = 3.0;
  const ScalarField n = normalize_inverse_depth(f);
  CHECK(n.at(0, 0) == doctest::Approx(0.5));
  CHECK(n.at(1, 0) == doctest::Approx(1.5));
  ScalarField c(3, 3, 1, 4.0);
  const ScalarField nc = normalize_inverse_depth(c);
  for (double v : nc.values()) CHECK(v == doctest::Approx(1.0));
  ScalarField zero(2, 2, 1, 0.0);
  try {
    (void)normalize_inverse_depth(zero);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateDepth);
  }
}

TEST_CASE("lambda schedule follows 0.2 over 2^l") {
  LossConfig config;
  CHECK(config.lambda_smooth(0) == 0.2);
  CHECK(config.lambda_smooth(1) == 0.1);
  CHECK(config.lambda_smooth(2) == 0.05);
  CHECK(config.lambda_smooth(3) == 0.025);
}

TEST_CASE("single-scale total equals photometric plus weighted smoothness") {
  const RenderedPair pair = render_pair(smooth_scene(11, 32));
  LossConfig config;
  config.num_scales = 1;
  const LossReport r = total_loss(pair.target, pair.source, pair.inv_depth,
                                  pair.spec.pose, pair.spec.intrinsics, config);
  const ScalarField norm = normalize_inverse_depth(pair.inv_depth);
  ScalarField depth(32, 32, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) depth.at(x, y) = 1.0 / norm.at(x, y);
  const WarpResult w =
      warp_image(pair.source, depth, pair.spec.intrinsics, pair.spec.pose);
  const double photo = photometric_loss(pair.target, w.image, w.mask);
  const double smooth = smoothness_loss(norm, pair.target);
  CHECK(r.total == doctest::Approx(photo + 0.2 * smooth).epsilon(1e-12));
  CHECK(r.warp_loss[0] == doctest::Approx(photo).epsilon(1e-12));
  CHECK(r.smooth_loss[0] == doctest::Approx(smooth).epsilon(1e-12));
}

TEST_CASE("report total is the lambda-weighted sum of its parts") {
  const RenderedPair pair = render_pair(smooth_scene(13, 64));
  LossConfig config;
  const LossReport r = total_loss(pair.target, pair.source, pair.inv_depth,
                                  pair.spec.pose, pair.spec.intrinsics, config);
  double sum = 0.0;
  for (int l = 0; l < config.num_scales; ++l) {
    CHECK(r.warp_loss[l] >= 0.0);
    CHECK(r.smooth_loss[l] >= 0.0);
    sum += r.warp_loss[l] + config.lambda_smooth(l) * r.smooth_loss[l];
  }
  CHECK(r.total == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("ground-truth inputs keep the total small") {
  const RenderedPair pair = render_pair(smooth_scene(17, 64));
  LossConfig config;
  // Inverse depth is normalized to unit mean before warping, so the matching
  // translation is the ground truth scaled by the same factor.
  Pose pose = pair.spec.pose;
  pose.translation *= pair.inv_depth.mean();
  const LossReport r = total_loss(pair.target, pair.source, pair.inv_depth,
                                  pose, pair.spec.intrinsics, config);
  CHECK(r.total < 0.01);
}

TEST_CASE("total loss is invariant to global inverse-depth scaling") {
  const RenderedPair pair = render_pair(smooth_scene(19, 32));
  LossConfig config;
  const LossReport base = total_loss(pair.target, pair.source, pair.inv_depth,
                                     pair.spec.pose, pair.spec.intrinsics,
                                     config);
  for (double s : {0.1, 0.37, 2.0, 10.0}) {
    ScalarField scaled = pair.inv_depth;
    for (double& v : scaled.values()) v *= s;
    const LossReport r = total_loss(pair.target, pair.source, scaled,
                                    pair.spec.pose, pair.spec.intrinsics,
                                    config);
    CHECK(std::abs(r.total - base.total) < 1e-9 * (1.0 + std::abs(base.total)));
  }
}

TEST_CASE("consistent epipolar weighting leaves the total unchanged") {
  const RenderedPair pair = render_pair(smooth_scene(23, 32));
  LossConfig plain;
  const LossReport a = total_loss(pair.target, pair.source, pair.inv_depth,
                                  pair.spec.pose, pair.spec.intrinsics, plain);
  LossConfig weighted;
  weighted.use_epipolar_weight = true;
  weighted.epipolar_E = pair.essential;
  const LossReport b = total_loss(pair.target, pair.source, pair.inv_depth,
                                  pair.spec.pose, pair.spec.intrinsics,
                                  weighted);
  CHECK(std::abs(a.total - b.total) < 1e-6 * (1.0 + std::abs(a.total)));
}

TEST_CASE("config validation") {
  LossConfig config;
  config.use_epipolar_weight = true;
  CHECK_THROWS_AS(config.validate(), Error);
  config.use_epipolar_weight = false;
  config.num_scales = 0;
  CHECK_THROWS_AS(config.validate(), Error);
}
