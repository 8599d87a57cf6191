// Command-line front end over the C library interface. Every subcommand
// prints a run header with the resolved value of each flag so a run can be
// reproduced from its log alone, and writes only inside its --out directory.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epivo/epivo.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitFailure = 2;

[[noreturn]] void die(epivo_status st) {
  std::cerr << "error: " << epivo_last_error() << "\n";
  std::exit(st == EPIVO_ERR_IO ? kExitIo : kExitFailure);
}

void check(epivo_status st) {
  if (st != EPIVO_OK) die(st);
}

std::string fmt(double v) {
  char buf[64];
  check(epivo_format_double(v, buf, sizeof(buf)));
  return buf;
}

using FieldPtr = std::unique_ptr<epivo_field, decltype(&epivo_field_destroy)>;

FieldPtr own(epivo_field* f) { return FieldPtr(f, &epivo_field_destroy); }

FieldPtr load_image(const std::string& path) {
  epivo_field* f = nullptr;
  check(epivo_read_image(path.c_str(), &f));
  return own(f);
}

FieldPtr load_pfm(const std::string& path) {
  epivo_field* f = nullptr;
  check(epivo_read_pfm(path.c_str(), &f));
  return own(f);
}

std::string joined(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << out << "\n";
    std::exit(kExitIo);
  }
}

struct HeaderWriter {
  explicit HeaderWriter(const std::string& cmd) {
    std::cout << "run: " << cmd << "\n";
  }
  void flag(const std::string& name, const std::string& value) {
    std::cout << "  " << name << " = " << value << "\n";
  }
  void flag(const std::string& name, double value) { flag(name, fmt(value)); }
  void flag(const std::string& name, int value) {
    flag(name, std::to_string(value));
  }
  void flag(const std::string& name, uint64_t value) {
    flag(name, std::to_string(value));
  }
  void flag(const std::string& name, bool value) {
    flag(name, std::string(value ? "true" : "false"));
  }
};

std::vector<double> read_corr(const std::string& path, std::vector<double>* src,
                              int min_rows) {
  int n = 0;
  check(epivo_read_correspondences(path.c_str(), nullptr, nullptr, 0, &n));
  if (n < min_rows) {
    std::cerr << "error: insufficient correspondences (" << n << " < "
              << min_rows << ")\n";
    std::exit(kExitFailure);
  }
  std::vector<double> tgt(2 * static_cast<size_t>(n));
  src->resize(2 * static_cast<size_t>(n));
  check(epivo_read_correspondences(path.c_str(), tgt.data(), src->data(), n,
                                   &n));
  return tgt;
}

void write_pose_file(const epivo_pose& pose, const std::string& path) {
  check(epivo_write_trajectory(&pose, 1, path.c_str()));
}

// ---- subcommands ----

struct FivePointArgs {
  std::string corr;
  std::string out;
  double ransac_thresh = 1e-6;
  int ransac_iters = 1000;
  uint64_t seed = 0;
};

int cmd_fivepoint(const FivePointArgs& a) {
  HeaderWriter hdr("fivepoint");
  hdr.flag("--corr", a.corr);
  hdr.flag("--out", a.out);
  hdr.flag("--ransac-thresh", a.ransac_thresh);
  hdr.flag("--ransac-iters", a.ransac_iters);
  hdr.flag("--seed", a.seed);
  ensure_out_dir(a.out);

  std::vector<double> source;
  std::vector<double> target = read_corr(a.corr, &source, 5);
  const int n = static_cast<int>(target.size() / 2);

  epivo_ransac_options opts;
  epivo_ransac_options_default(&opts);
  opts.threshold = a.ransac_thresh;
  opts.max_iters = a.ransac_iters;
  opts.seed = a.seed;

  double e[9];
  std::vector<uint8_t> inliers(static_cast<size_t>(n));
  int inlier_count = 0, iters = 0;
  check(epivo_ransac_essential(target.data(), source.data(), n, &opts, e,
                               inliers.data(), &inlier_count, &iters));

  epivo_pose pose;
  int votes = 0;
  std::vector<double> in_t, in_s;
  for (int i = 0; i < n; ++i) {
    if (!inliers[i]) continue;
    in_t.push_back(target[2 * i]);
    in_t.push_back(target[2 * i + 1]);
    in_s.push_back(source[2 * i]);
    in_s.push_back(source[2 * i + 1]);
  }
  check(epivo_decompose_essential(e, in_t.data(), in_s.data(),
                                  static_cast<int>(in_t.size() / 2), &pose,
                                  &votes));

  check(epivo_write_essential(e, joined(a.out, "E.txt").c_str()));
  write_pose_file(pose, joined(a.out, "pose.txt"));
  {
    std::ofstream f(joined(a.out, "inliers.csv"));
    f << "index,inlier\n";
    for (int i = 0; i < n; ++i) {
      f << i << "," << static_cast<int>(inliers[i]) << "\n";
    }
  }
  std::cout << "inliers " << inlier_count << "/" << n << " votes " << votes
            << " iterations " << iters << "\n";
  return kExitOk;
}

struct OptimizeArgs {
  std::string target, source, intrinsics, depth_init, corr, out;
  double flat_depth = 0.0;
  uint64_t seed = 0;
  int iters = 500;
  double lr = 2e-4;
  int scales = 4;
  double lambda_smooth = 0.2;
  double ransac_thresh = 1e-6;
  int ransac_iters = 1000;
  bool no_epi = false;
  bool stop_grad_weight = false;
};

int cmd_optimize(const OptimizeArgs& a) {
  HeaderWriter hdr("optimize");
  hdr.flag("--target", a.target);
  hdr.flag("--source", a.source);
  hdr.flag("--intrinsics", a.intrinsics);
  hdr.flag("--depth-init", a.depth_init.empty() ? "(none)" : a.depth_init);
  hdr.flag("--flat-depth", a.flat_depth);
  hdr.flag("--corr", a.corr.empty() ? "(none)" : a.corr);
  hdr.flag("--out", a.out);
  hdr.flag("--seed", a.seed);
  hdr.flag("--iters", a.iters);
  hdr.flag("--lr", a.lr);
  hdr.flag("--scales", a.scales);
  hdr.flag("--lambda-smooth", a.lambda_smooth);
  hdr.flag("--ransac-thresh", a.ransac_thresh);
  hdr.flag("--ransac-iters", a.ransac_iters);
  hdr.flag("--no-epi", a.no_epi);
  hdr.flag("--stop-grad-weight", a.stop_grad_weight);
  ensure_out_dir(a.out);

  FieldPtr target = load_image(a.target);
  FieldPtr source = load_image(a.source);
  epivo_intrinsics k;
  check(epivo_read_intrinsics(a.intrinsics.c_str(), &k));

  FieldPtr inv_depth_init = own(nullptr);
  if (!a.depth_init.empty()) {
    FieldPtr depth = load_pfm(a.depth_init);
    epivo_field* inv = nullptr;
    check(epivo_field_create(epivo_field_width(depth.get()),
                             epivo_field_height(depth.get()), 1, &inv));
    const double* d = epivo_field_data_const(depth.get());
    double* id = epivo_field_data(inv);
    const size_t count = static_cast<size_t>(epivo_field_width(depth.get())) *
                         epivo_field_height(depth.get());
    for (size_t i = 0; i < count; ++i) id[i] = d[i] > 0.0 ? 1.0 / d[i] : 0.0;
    inv_depth_init = own(inv);
  } else {
    if (!(a.flat_depth > 0.0)) {
      std::cerr << "error: need --depth-init or a positive --flat-depth\n";
      return kExitFailure;
    }
    epivo_field* inv = nullptr;
    check(epivo_field_create(epivo_field_width(target.get()),
                             epivo_field_height(target.get()), 1, &inv));
    double* id = epivo_field_data(inv);
    const size_t count = static_cast<size_t>(epivo_field_width(target.get())) *
                         epivo_field_height(target.get());
    for (size_t i = 0; i < count; ++i) id[i] = 1.0 / a.flat_depth;
    inv_depth_init = own(inv);
  }

  epivo_loss_options loss_opts;
  epivo_loss_options_default(&loss_opts);
  loss_opts.num_scales = a.scales;
  loss_opts.lambda_smooth_base = a.lambda_smooth;
  loss_opts.stop_gradient_on_weight = a.stop_grad_weight ? 1 : 0;

  epivo_pose pose_init;
  const double zero6[6] = {0, 0, 0, 0, 0, 0};
  check(epivo_pose_exp(zero6, &pose_init));

  if (!a.no_epi) {
    if (a.corr.empty()) {
      std::cerr << "error: epipolar weighting needs --corr (or pass --no-epi)\n";
      return kExitFailure;
    }
    std::vector<double> src;
    std::vector<double> tgt = read_corr(a.corr, &src, 5);
    const int n = static_cast<int>(tgt.size() / 2);
    epivo_ransac_options ropts;
    epivo_ransac_options_default(&ropts);
    ropts.threshold = a.ransac_thresh;
    ropts.max_iters = a.ransac_iters;
    ropts.seed = a.seed;
    std::vector<uint8_t> inliers(static_cast<size_t>(n));
    int inlier_count = 0;
    check(epivo_ransac_essential(tgt.data(), src.data(), n, &ropts,
                                 loss_opts.epipolar_e, inliers.data(),
                                 &inlier_count, nullptr));
    loss_opts.use_epipolar_weight = 1;
    std::vector<double> in_t, in_s;
    for (int i = 0; i < n; ++i) {
      if (!inliers[i]) continue;
      in_t.push_back(tgt[2 * i]);
      in_t.push_back(tgt[2 * i + 1]);
      in_s.push_back(src[2 * i]);
      in_s.push_back(src[2 * i + 1]);
    }
    int votes = 0;
    check(epivo_decompose_essential(loss_opts.epipolar_e, in_t.data(),
                                    in_s.data(),
                                    static_cast<int>(in_t.size() / 2),
                                    &pose_init, &votes));
    std::cout << "five-point init: " << inlier_count << "/" << n
              << " inliers\n";
  }

  epivo_optim_options opts;
  epivo_optim_options_default(&opts);
  opts.iters = a.iters;
  opts.learning_rate = a.lr;

  epivo_optim_result* result = nullptr;
  check(epivo_optimize(target.get(), source.get(), inv_depth_init.get(),
                       &pose_init, &k, &loss_opts, &opts, &result));
  std::unique_ptr<epivo_optim_result, decltype(&epivo_optim_result_destroy)>
      result_guard(result, &epivo_optim_result_destroy);

  epivo_pose pose;
  check(epivo_optim_result_pose(result, &pose));
  epivo_field* inv_out = nullptr;
  check(epivo_optim_result_inv_depth(result, &inv_out));
  FieldPtr inv_depth = own(inv_out);

  write_pose_file(pose, joined(a.out, "pose.txt"));
  check(epivo_write_pfm(inv_depth.get(), joined(a.out, "inv_depth.pfm").c_str()));

  if (loss_opts.use_epipolar_weight) {
    epivo_field* w = nullptr;
    check(epivo_weight_map(inv_depth.get(), &k, &pose, loss_opts.epipolar_e,
                           &w));
    FieldPtr weight = own(w);
    check(epivo_write_pfm(weight.get(), joined(a.out, "weight.pfm").c_str()));
    check(epivo_write_heatmap(weight.get(),
                              joined(a.out, "weight.pgm").c_str()));
  }

  const int trace_len = epivo_optim_result_trace_length(result);
  {
    std::ofstream f(joined(a.out, "trace.csv"));
    f << "iter,total";
    for (int s = 0; s < a.scales; ++s) f << ",warp_" << s;
    for (int s = 0; s < a.scales; ++s) f << ",smooth_" << s;
    f << "\n";
    for (int i = 0; i < trace_len; ++i) {
      epivo_loss_report rep;
      check(epivo_optim_result_report(result, i, &rep));
      f << i << "," << fmt(rep.total);
      for (int s = 0; s < a.scales; ++s) f << "," << fmt(rep.warp_loss[s]);
      for (int s = 0; s < a.scales; ++s) f << "," << fmt(rep.smooth_loss[s]);
      f << "\n";
    }
  }
  epivo_loss_report last;
  check(epivo_optim_result_report(result, trace_len - 1, &last));
  std::cout << "final loss " << fmt(last.total) << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string pred, gt, mask, out;
  double cap = 80.0;
};

int cmd_eval(const EvalArgs& a) {
  HeaderWriter hdr("eval");
  hdr.flag("--pred", a.pred);
  hdr.flag("--gt", a.gt);
  hdr.flag("--mask", a.mask.empty() ? "(none)" : a.mask);
  hdr.flag("--out", a.out);
  hdr.flag("--cap", a.cap);
  ensure_out_dir(a.out);

  const bool depth_mode = a.pred.size() > 4 &&
                          a.pred.substr(a.pred.size() - 4) == ".pfm";
  std::ofstream csv(joined(a.out, "metrics.csv"));
  std::ofstream txt(joined(a.out, "metrics.txt"));
  if (depth_mode) {
    FieldPtr pred = load_pfm(a.pred);
    FieldPtr gt = load_pfm(a.gt);
    FieldPtr mask = own(nullptr);
    if (!a.mask.empty()) mask = load_image(a.mask);
    epivo_depth_metrics m;
    check(epivo_depth_metrics_compute(pred.get(), gt.get(), mask.get(), a.cap,
                                      &m));
    csv << "abs_rel,sq_rel,rmse,rmse_log,a1,a2,a3\n"
        << fmt(m.abs_rel) << "," << fmt(m.sq_rel) << "," << fmt(m.rmse) << ","
        << fmt(m.rmse_log) << "," << fmt(m.a1) << "," << fmt(m.a2) << ","
        << fmt(m.a3) << "\n";
    const std::string line =
        "abs_rel " + fmt(m.abs_rel) + "  sq_rel " + fmt(m.sq_rel) + "  rmse " +
        fmt(m.rmse) + "  rmse_log " + fmt(m.rmse_log) + "  a1 " + fmt(m.a1) +
        "  a2 " + fmt(m.a2) + "  a3 " + fmt(m.a3);
    txt << line << "\n";
    std::cout << line << "\n";
  } else {
    int n = 0;
    check(epivo_read_trajectory(a.pred.c_str(), nullptr, 0, &n));
    int ng = 0;
    check(epivo_read_trajectory(a.gt.c_str(), nullptr, 0, &ng));
    if (n != ng) {
      std::cerr << "error: trajectory lengths differ (" << n << " vs " << ng
                << ")\n";
      return kExitFailure;
    }
    std::vector<epivo_pose> pred(static_cast<size_t>(n)),
        gt(static_cast<size_t>(n));
    check(epivo_read_trajectory(a.pred.c_str(), pred.data(), n, &n));
    check(epivo_read_trajectory(a.gt.c_str(), gt.data(), n, &ng));
    epivo_pose_metrics m;
    check(epivo_snippet_metrics(pred.data(), gt.data(), n, 3, &m));
    csv << "ate_mean,ate_std,atde_mean,atde_std\n"
        << fmt(m.ate_mean) << "," << fmt(m.ate_std) << "," << fmt(m.atde_mean)
        << "," << fmt(m.atde_std) << "\n";
    const std::string line = "ate " + fmt(m.ate_mean) + " +- " +
                             fmt(m.ate_std) + "  atde " + fmt(m.atde_mean) +
                             " +- " + fmt(m.atde_std);
    txt << line << "\n";
    std::cout << line << "\n";
  }
  return kExitOk;
}

struct GradcheckArgs {
  uint64_t seed = 0;
  int configs = 10;
  double tol = 1e-4;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  HeaderWriter hdr("gradcheck");
  hdr.flag("--seed", a.seed);
  hdr.flag("--configs", a.configs);
  hdr.flag("--tol", a.tol);
  double worst = 0.0;
  int failures = 0;
  check(epivo_gradcheck(a.seed, a.configs, a.tol, &worst, &failures));
  std::cout << "max relative error " << fmt(worst) << ", failures "
            << failures << "\n";
  std::cout << (failures == 0 ? "PASS" : "FAIL") << "\n";
  return failures == 0 ? kExitOk : kExitFailure;
}

struct SynthArgs {
  std::string scene, out;
  uint64_t seed = 0;
  int num_corr = 0;
  double noise = 0.0;
  double outliers = 0.0;
};

int cmd_synth(const SynthArgs& a) {
  HeaderWriter hdr("synth");
  hdr.flag("--scene", a.scene);
  hdr.flag("--out", a.out);
  hdr.flag("--seed", a.seed);
  hdr.flag("--num-corr", a.num_corr);
  hdr.flag("--noise", a.noise);
  hdr.flag("--outliers", a.outliers);
  ensure_out_dir(a.out);

  epivo_rendered_pair* pair = nullptr;
  check(epivo_render_scene(a.scene.c_str(), &pair));
  std::unique_ptr<epivo_rendered_pair, decltype(&epivo_rendered_pair_destroy)>
      guard(pair, &epivo_rendered_pair_destroy);

  auto field = [&](int which) {
    epivo_field* f = nullptr;
    check(epivo_rendered_pair_field(pair, which, &f));
    return own(f);
  };
  check(epivo_write_image(field(0).get(), joined(a.out, "target.pgm").c_str()));
  check(epivo_write_image(field(1).get(), joined(a.out, "source.pgm").c_str()));
  check(epivo_write_pfm(field(2).get(), joined(a.out, "depth.pfm").c_str()));
  check(epivo_write_pfm(field(3).get(),
                        joined(a.out, "inv_depth.pfm").c_str()));
  check(epivo_write_image(field(4).get(),
                          joined(a.out, "mover_mask.pgm").c_str()));
  check(epivo_write_pfm(field(5).get(), joined(a.out, "corr_x.pfm").c_str()));
  check(epivo_write_pfm(field(6).get(), joined(a.out, "corr_y.pfm").c_str()));

  epivo_pose pose;
  check(epivo_rendered_pair_pose(pair, &pose));
  write_pose_file(pose, joined(a.out, "pose.txt"));
  epivo_intrinsics k;
  check(epivo_rendered_pair_intrinsics(pair, &k));
  check(epivo_write_intrinsics(&k, joined(a.out, "intrinsics.txt").c_str()));
  double e[9];
  if (epivo_rendered_pair_essential(pair, e)) {
    check(epivo_write_essential(e, joined(a.out, "E.txt").c_str()));
  }
  if (a.num_corr > 0) {
    std::vector<double> tgt(2 * static_cast<size_t>(a.num_corr));
    std::vector<double> src(2 * static_cast<size_t>(a.num_corr));
    check(epivo_sample_correspondences(pair, a.num_corr, a.noise, a.outliers,
                                       a.seed, tgt.data(), src.data(),
                                       nullptr));
    check(epivo_write_correspondences(tgt.data(), src.data(), a.num_corr,
                                      joined(a.out, "corr.csv").c_str()));
  }
  std::cout << "rendered " << a.scene << " -> " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epipolar visual odometry toolkit"};
  app.require_subcommand(1);

  FivePointArgs fp;
  CLI::App* fivepoint = app.add_subcommand(
      "fivepoint", "robust essential-matrix estimation from correspondences");
  fivepoint->add_option("--corr", fp.corr)->required();
  fivepoint->add_option("--out", fp.out)->required();
  fivepoint->add_option("--ransac-thresh", fp.ransac_thresh);
  fivepoint->add_option("--ransac-iters", fp.ransac_iters);
  fivepoint->add_option("--seed", fp.seed);

  OptimizeArgs op;
  CLI::App* optimize = app.add_subcommand(
      "optimize", "direct photometric pose/depth optimization");
  optimize->add_option("--target", op.target)->required();
  optimize->add_option("--source", op.source)->required();
  optimize->add_option("--intrinsics", op.intrinsics)->required();
  optimize->add_option("--depth-init", op.depth_init);
  optimize->add_option("--flat-depth", op.flat_depth);
  optimize->add_option("--corr", op.corr);
  optimize->add_option("--out", op.out)->required();
  optimize->add_option("--seed", op.seed);
  optimize->add_option("--iters", op.iters);
  optimize->add_option("--lr", op.lr);
  optimize->add_option("--scales", op.scales);
  optimize->add_option("--lambda-smooth", op.lambda_smooth);
  optimize->add_option("--ransac-thresh", op.ransac_thresh);
  optimize->add_option("--ransac-iters", op.ransac_iters);
  optimize->add_flag("--no-epi", op.no_epi);
  optimize->add_flag("--stop-grad-weight", op.stop_grad_weight);

  EvalArgs ev;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "depth or trajectory metrics");
  eval_cmd->add_option("--pred", ev.pred)->required();
  eval_cmd->add_option("--gt", ev.gt)->required();
  eval_cmd->add_option("--mask", ev.mask);
  eval_cmd->add_option("--out", ev.out)->required();
  eval_cmd->add_option("--cap", ev.cap);

  GradcheckArgs gc;
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "analytic vs finite-difference check");
  gradcheck->add_option("--seed", gc.seed);
  gradcheck->add_option("--configs", gc.configs);
  gradcheck->add_option("--tol", gc.tol);

  SynthArgs sy;
  CLI::App* synth =
      app.add_subcommand("synth", "render a synthetic scene pair to disk");
  synth->add_option("--scene", sy.scene)->required();
  synth->add_option("--out", sy.out)->required();
  synth->add_option("--seed", sy.seed);
  synth->add_option("--num-corr", sy.num_corr);
  synth->add_option("--noise", sy.noise);
  synth->add_option("--outliers", sy.outliers);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFailure;
  }

  if (fivepoint->parsed()) return cmd_fivepoint(fp);
  if (optimize->parsed()) return cmd_optimize(op);
  if (eval_cmd->parsed()) return cmd_eval(ev);
  if (gradcheck->parsed()) return cmd_gradcheck(gc);
  if (synth->parsed()) return cmd_synth(sy);
  return kExitFailure;
}
