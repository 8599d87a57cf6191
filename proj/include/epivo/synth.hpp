#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epivo/field.hpp"
#include "epivo/geometry.hpp"

namespace epivo {

struct PlaneSpec {
  Eigen::Vector3d normal = {0.0, 0.0, 1.0};  // unit; n . X = offset
  double offset = 10.0;
  int texture_id = 0;        // 0 = sinusoid mix, 1 = stripes, 2 = hard stripes
  double texture_freq = 0.0; // cycles per scene unit; 0 = auto band limit
  double cross_amp = 0.0;    // stripes: amplitude of the weak cross variation
  uint64_t texture_seed = 0;
};

// Square patch on plane 0 carrying its own rigid motion between frames.
struct MoverSpec {
  double u0 = 0.0;  // patch center in plane-local coordinates
  double v0 = 0.0;
  double half = 1.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct SceneSpec {
  int width = 64;
  int height = 64;
  CameraIntrinsics intrinsics{64.0, 64.0, 31.5, 31.5};
  Pose pose;  // target -> source
  std::vector<PlaneSpec> planes;
  std::optional<MoverSpec> mover;
  uint64_t seed = 0;
};

struct RenderedPair {
  ScalarField target;
  ScalarField source;
  ScalarField depth;       // target-frame depth, exact
  ScalarField inv_depth;
  ScalarField corr_x;      // exact source pixel of every target pixel
  ScalarField corr_y;
  ValidityMask mover_mask;
  std::optional<EssentialMatrix> essential;  // absent for zero translation
  SceneSpec spec;
};

// Analytic ray-plane renderer; both views sample the same plane-anchored
// procedural texture, so the pair is photometrically consistent up to the
// band limit of the texture.
RenderedPair render_pair(const SceneSpec& spec);

struct LabeledCorrespondences {
  std::vector<Correspondence> matches;
  std::vector<bool> is_inlier;
};

// Draws n static-region correspondences at continuous subpixel positions,
// perturbs sources with isotropic noise, and replaces floor(outlier_frac*n)
// of them with uniform draws. Deterministic in seed.
LabeledCorrespondences sample_correspondences(const RenderedPair& pair, int n,
                                              double noise_sigma,
                                              double outlier_frac, uint64_t seed);

// key = value scene description, documented in the README.
SceneSpec read_scene_spec(const std::string& path);
void write_scene_spec(const SceneSpec& spec, const std::string& path);

// Canned scenes used by tests and the paired-run experiments.
SceneSpec smooth_scene(uint64_t seed, int size = 64);
SceneSpec repeated_texture_scene(uint64_t seed, int size = 64);
SceneSpec mover_scene(uint64_t seed, double mover_shift, int size = 64);

}  // namespace epivo
