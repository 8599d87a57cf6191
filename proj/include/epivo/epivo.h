/* C interface to the epipolar visual-odometry core.
 *
 * All objects are opaque handles created and destroyed here. Functions
 * return epivo_status; on failure the thread-local message from
 * epivo_last_error() describes the problem. Pixel images and float maps
 * are exchanged as dense row-major arrays through epivo_field handles.
 */
#ifndef EPIVO_EPIVO_H_
#define EPIVO_EPIVO_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum epivo_status {
  EPIVO_OK = 0,
  EPIVO_ERR_IO = 1,
  EPIVO_ERR_INVALID_ARGUMENT = 2,
  EPIVO_ERR_ZERO_TRANSLATION = 3,
  EPIVO_ERR_DEGENERATE_CONFIGURATION = 4,
  EPIVO_ERR_INSUFFICIENT_CORRESPONDENCES = 5,
  EPIVO_ERR_NO_MODEL_FOUND = 6,
  EPIVO_ERR_AMBIGUOUS_CHEIRALITY = 7,
  EPIVO_ERR_DIMENSION_MISMATCH = 8,
  EPIVO_ERR_DEGENERATE_DEPTH = 9,
  EPIVO_ERR_SHAPE_MISMATCH = 10,
  EPIVO_ERR_EMPTY_MASK = 11,
  EPIVO_ERR_EMPTY_INPUT = 12,
  EPIVO_ERR_DEGENERATE_SCALE = 13,
  EPIVO_ERR_INVALID_SCENE = 14,
  EPIVO_ERR_INSUFFICIENT_STATIC_AREA = 15,
  EPIVO_ERR_UNKNOWN = 99
} epivo_status;

/* Message for the most recent failing call on this thread. */
const char* epivo_last_error(void);

typedef struct epivo_intrinsics {
  double fx, fy, cx, cy;
} epivo_intrinsics;

/* Rigid transform as a row-major 3x3 rotation plus translation. */
typedef struct epivo_pose {
  double rotation[9];
  double translation[3];
} epivo_pose;

/* ---- dense fields (images, depth maps, masks) ---- */

typedef struct epivo_field epivo_field;

epivo_status epivo_field_create(int width, int height, int channels,
                                epivo_field** out);
void epivo_field_destroy(epivo_field* f);
int epivo_field_width(const epivo_field* f);
int epivo_field_height(const epivo_field* f);
int epivo_field_channels(const epivo_field* f);
/* Row-major, channel-interleaved storage of width*height*channels doubles. */
double* epivo_field_data(epivo_field* f);
const double* epivo_field_data_const(const epivo_field* f);

epivo_status epivo_read_image(const char* path, epivo_field** out);
epivo_status epivo_write_image(const epivo_field* f, const char* path);
epivo_status epivo_read_pfm(const char* path, epivo_field** out);
epivo_status epivo_write_pfm(const epivo_field* f, const char* path);
epivo_status epivo_write_heatmap(const epivo_field* f, const char* path);

/* ---- text formats ---- */

epivo_status epivo_read_intrinsics(const char* path, epivo_intrinsics* out);
epivo_status epivo_write_intrinsics(const epivo_intrinsics* k, const char* path);

/* Correspondence CSV (header tx,ty,sx,sy, normalized coordinates). Pass
 * target == NULL to query the row count; otherwise capacity is the size of
 * both 2*capacity arrays. */
epivo_status epivo_read_correspondences(const char* path, double* target,
                                        double* source, int capacity, int* n);
epivo_status epivo_write_correspondences(const double* target,
                                         const double* source, int n,
                                         const char* path);

epivo_status epivo_read_essential(const char* path, double e[9]);
epivo_status epivo_write_essential(const double e[9], const char* path);

/* KITTI-style trajectory, one 3x4 row-major matrix per line. Pass
 * poses == NULL to query the count. */
epivo_status epivo_read_trajectory(const char* path, epivo_pose* poses,
                                   int capacity, int* n);
epivo_status epivo_write_trajectory(const epivo_pose* poses, int n,
                                    const char* path);

/* Shortest decimal representation that round-trips the double. */
epivo_status epivo_format_double(double v, char* buf, size_t buf_size);

/* ---- pose and essential-matrix geometry ---- */

epivo_status epivo_pose_exp(const double xi[6], epivo_pose* out);
epivo_status epivo_pose_log(const epivo_pose* pose, double xi[6]);
epivo_status epivo_pose_compose(const epivo_pose* a, const epivo_pose* b,
                                epivo_pose* out);
epivo_status epivo_pose_inverse(const epivo_pose* pose, epivo_pose* out);

/* E (row-major, unit Frobenius norm) from a relative pose. */
epivo_status epivo_essential_from_pose(const epivo_pose* pose, double e[9]);

/* Five-point minimal solver. `target`/`source` are 2*n arrays of normalized
 * coordinates (x0 y0 x1 y1 ...) with n == 5. Writes up to 10 essential
 * matrices (row-major, consecutive) and their count. */
epivo_status epivo_five_point(const double* target, const double* source,
                              double essentials[90], int* count);

epivo_status epivo_sampson_error(const double e[9], double tx, double ty,
                                 double sx, double sy, double* out);

typedef struct epivo_ransac_options {
  double threshold;  /* Sampson error inlier gate */
  int max_iters;
  uint64_t seed;
  int adaptive;      /* nonzero = early exit on inlier-ratio bound */
} epivo_ransac_options;

void epivo_ransac_options_default(epivo_ransac_options* opts);

/* Robust essential-matrix fit over n normalized correspondences. inlier_mask
 * (length n, may be NULL) receives 0/1 flags. */
epivo_status epivo_ransac_essential(const double* target, const double* source,
                                    int n, const epivo_ransac_options* opts,
                                    double e[9], uint8_t* inlier_mask,
                                    int* inlier_count, int* iterations_run);

/* Pose from E by cheirality voting over the n correspondences. */
epivo_status epivo_decompose_essential(const double e[9], const double* target,
                                       const double* source, int n,
                                       epivo_pose* pose, int* votes);

/* ---- warping and loss ---- */

/* Inverse-warp `source` into the target view. `inv_depth` is a 1-channel
 * field matching the warp output size; `mask_out` (1-channel, may be NULL)
 * receives 1.0 where the warp is valid. */
epivo_status epivo_warp_image(const epivo_field* source,
                              const epivo_field* inv_depth,
                              const epivo_pose* pose,
                              const epivo_intrinsics* k, epivo_field** out,
                              epivo_field** mask_out);

typedef struct epivo_loss_options {
  int num_scales;
  double lambda_smooth_base;
  int use_epipolar_weight;
  double epipolar_e[9];     /* used when use_epipolar_weight != 0 */
  int stop_gradient_on_weight;
} epivo_loss_options;

void epivo_loss_options_default(epivo_loss_options* opts);

typedef struct epivo_loss_report {
  double total;
  double warp_loss[8];
  double smooth_loss[8];
  long valid_pixel_counts[8];
} epivo_loss_report;

/* Per-pixel exp(|epipolar residual|) of the projection of each target pixel
 * through pose and depth; invalid pixels get weight 1. */
epivo_status epivo_weight_map(const epivo_field* inv_depth,
                              const epivo_intrinsics* k,
                              const epivo_pose* pose, const double e[9],
                              epivo_field** out);

epivo_status epivo_total_loss(const epivo_field* target,
                              const epivo_field* source,
                              const epivo_field* inv_depth,
                              const epivo_pose* pose,
                              const epivo_intrinsics* k,
                              const epivo_loss_options* opts,
                              epivo_loss_report* report);

/* Loss plus analytic gradients: d_pose is the left-multiplicative tangent
 * (omega, v); d_inv_depth matches inv_depth. */
epivo_status epivo_loss_gradients(const epivo_field* target,
                                  const epivo_field* source,
                                  const epivo_field* inv_depth,
                                  const epivo_pose* pose,
                                  const epivo_intrinsics* k,
                                  const epivo_loss_options* opts,
                                  double d_pose[6], epivo_field** d_inv_depth,
                                  epivo_loss_report* report);

/* ---- joint optimization ---- */

typedef struct epivo_optim_options {
  int iters;
  double learning_rate;
  double beta1, beta2, epsilon;
  int optimize_pose;
  int optimize_depth;
} epivo_optim_options;

void epivo_optim_options_default(epivo_optim_options* opts);

typedef struct epivo_optim_result epivo_optim_result;

epivo_status epivo_optimize(const epivo_field* target,
                            const epivo_field* source,
                            const epivo_field* inv_depth_init,
                            const epivo_pose* pose_init,
                            const epivo_intrinsics* k,
                            const epivo_loss_options* loss_opts,
                            const epivo_optim_options* opts,
                            epivo_optim_result** out);
void epivo_optim_result_destroy(epivo_optim_result* r);
epivo_status epivo_optim_result_pose(const epivo_optim_result* r,
                                     epivo_pose* pose);
epivo_status epivo_optim_result_inv_depth(const epivo_optim_result* r,
                                          epivo_field** out);
int epivo_optim_result_trace_length(const epivo_optim_result* r);
epivo_status epivo_optim_result_trace(const epivo_optim_result* r,
                                      double* loss_values);
/* Full per-scale report of one trace entry. */
epivo_status epivo_optim_result_report(const epivo_optim_result* r, int index,
                                       epivo_loss_report* report);

/* ---- evaluation ---- */

typedef struct epivo_depth_metrics {
  double abs_rel, sq_rel, rmse, rmse_log, a1, a2, a3;
} epivo_depth_metrics;

/* Median-scaled depth metrics over mask!=0 pixels, clamped to [1e-3, cap]. */
epivo_status epivo_depth_metrics_compute(const epivo_field* pred,
                                         const epivo_field* gt,
                                         const epivo_field* mask, double cap,
                                         epivo_depth_metrics* out);

/* ATE with a least-squares global scale over n aligned poses. */
epivo_status epivo_ate(const epivo_pose* pred, const epivo_pose* gt, int n,
                       double* out);
/* Angle in radians between predicted and true translation directions. */
epivo_status epivo_atde(const epivo_pose* pred, const epivo_pose* gt,
                        double* out);

typedef struct epivo_pose_metrics {
  double ate_mean, ate_std, atde_mean, atde_std;
} epivo_pose_metrics;

/* Splits both trajectories into snippets of `length` frames (relative to
 * each snippet's first frame) and averages ATE / ATDE over them. */
epivo_status epivo_snippet_metrics(const epivo_pose* pred,
                                   const epivo_pose* gt, int n, int length,
                                   epivo_pose_metrics* out);

/* Analytic-vs-central-difference gradient check on `configs` random
 * rendered scenes. Writes the worst relative error seen and the number of
 * components exceeding `tol`. */
epivo_status epivo_gradcheck(uint64_t seed, int configs, double tol,
                             double* max_rel_err, int* failures);

/* ---- synthetic scenes ---- */

typedef struct epivo_rendered_pair epivo_rendered_pair;

epivo_status epivo_render_scene(const char* scene_path,
                                epivo_rendered_pair** out);
void epivo_rendered_pair_destroy(epivo_rendered_pair* p);
/* which: 0 target, 1 source, 2 depth, 3 inverse depth, 4 mover mask,
 * 5 source-x correspondence grid, 6 source-y correspondence grid. */
epivo_status epivo_rendered_pair_field(const epivo_rendered_pair* p, int which,
                                       epivo_field** out);
epivo_status epivo_rendered_pair_pose(const epivo_rendered_pair* p,
                                      epivo_pose* pose);
epivo_status epivo_rendered_pair_intrinsics(const epivo_rendered_pair* p,
                                            epivo_intrinsics* k);
/* 0 when the pair has no essential matrix (zero translation). */
int epivo_rendered_pair_essential(const epivo_rendered_pair* p, double e[9]);

/* n noisy normalized correspondences from the static part of the scene.
 * target/source are 2*n output arrays; inlier flags may be NULL. */
epivo_status epivo_sample_correspondences(const epivo_rendered_pair* p, int n,
                                          double noise_sigma,
                                          double outlier_frac, uint64_t seed,
                                          double* target, double* source,
                                          uint8_t* inliers);

#ifdef __cplusplus
}
#endif

#endif  /* EPIVO_EPIVO_H_ */
