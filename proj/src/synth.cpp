#include "epivo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "epivo/io.hpp"
#include "epivo/rng.hpp"

namespace epivo {

namespace {

struct TextureWave {
  double freq;
  double cu;
  double cv;
  double phase;
  double amp;
};

struct PlaneFrame {
  Eigen::Vector3d e1;
  Eigen::Vector3d e2;
  Eigen::Vector3d origin;
  std::vector<TextureWave> waves;  // empty for the stripe texture
  const PlaneSpec* spec = nullptr;
};

PlaneFrame make_frame(const PlaneSpec& p, double band_limit) {
  PlaneFrame f;
  f.spec = &p;
  const Eigen::Vector3d axis =
      std::abs(p.normal.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
  f.e1 = axis.cross(p.normal).normalized();
  f.e2 = p.normal.cross(f.e1);
  f.origin = p.offset * p.normal;
  if (p.texture_id == 0) {
    const double base = p.texture_freq > 0.0 ? p.texture_freq : band_limit;
    Rng rng(p.texture_seed * 0x9e3779b9ULL + 17);
    for (int i = 0; i < 8; ++i) {
      TextureWave w;
      w.freq = rng.uniform(0.3, 1.0) * base;
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      w.cu = std::cos(angle);
      w.cv = std::sin(angle);
      w.phase = rng.uniform(0.0, 2.0 * M_PI);
      w.amp = 0.45 / 8.0;
      f.waves.push_back(w);
    }
  }
  return f;
}

double texture_value(const PlaneFrame& f, double u, double v) {
  double val = 0.5;
  if (f.spec->texture_id == 0) {
    for (const TextureWave& w : f.waves) {
      val += w.amp * std::sin(2.0 * M_PI * w.freq * (w.cu * u + w.cv * v) + w.phase);
    }
  } else if (f.spec->texture_id == 1) {
    const double freq = f.spec->texture_freq;
    val += 0.4 * std::sin(2.0 * M_PI * freq * u) +
           f.spec->cross_amp * std::sin(2.0 * M_PI * freq / 7.0 * v);
  } else {
    // hard-edged stripes: the intensity steps make the resampling error
    // first-order in the pixel size (the smooth textures are second-order)
    const double freq = f.spec->texture_freq;
    const double square = std::sin(2.0 * M_PI * freq * u) >= 0.0 ? 1.0 : -1.0;
    val += f.spec->cross_amp * square +
           0.2 * std::sin(2.0 * M_PI * (freq / 8.0) * u + 0.7);
  }
  return std::clamp(val, 0.0, 1.0);
}

// Intersection parameter of ray s*r with plane n.X = o; negative = no hit.
double hit_plane(const Eigen::Vector3d& normal, double offset,
                 const Eigen::Vector3d& ray) {
  const double denom = normal.dot(ray);
  if (denom < 1e-9) return -1.0;
  const double s = offset / denom;
  return s > 1e-9 ? s : -1.0;
}

// Largest plane depth over the target frustum, for the texture band limit.
double max_frustum_depth(const SceneSpec& spec, const PlaneSpec& plane) {
  const Eigen::Matrix3d ki = spec.intrinsics.inverse_matrix();
  double dmax = 0.0;
  const double xs[3] = {0.0, 0.5 * (spec.width - 1.0), spec.width - 1.0};
  const double ys[3] = {0.0, 0.5 * (spec.height - 1.0), spec.height - 1.0};
  for (double x : xs) {
    for (double y : ys) {
      const Eigen::Vector3d ray = ki * Eigen::Vector3d(x, y, 1.0);
      const double s = hit_plane(plane.normal, plane.offset, ray);
      if (s > 0.0) dmax = std::max(dmax, s);
    }
  }
  return dmax;
}

struct Hit {
  double s = -1.0;
  int plane = -1;
  bool mover = false;
  double u = 0.0;
  double v = 0.0;
};

}  // namespace

RenderedPair render_pair(const SceneSpec& spec) {
  if (spec.planes.empty()) {
    throw Error(ErrorCode::kInvalidScene, "scene has no planes");
  }
  SceneSpec normalized = spec;
  for (PlaneSpec& p : normalized.planes) {
    if (!(p.normal.norm() > 0.0) || !(p.offset > 0.0)) {
      throw Error(ErrorCode::kInvalidScene, "bad plane parameters");
    }
    p.normal.normalize();
    if (p.normal.z() < 0.0) {
      p.normal = -p.normal;
    }
  }

  const int w = normalized.width;
  const int h = normalized.height;
  const CameraIntrinsics& k = normalized.intrinsics;
  const Pose& pose = normalized.pose;
  const Eigen::Matrix3d ki = k.inverse_matrix();

  std::vector<PlaneFrame> frames;
  for (const PlaneSpec& p : normalized.planes) {
    const double dmax = max_frustum_depth(normalized, p);
    if (dmax <= 0.0) {
      throw Error(ErrorCode::kInvalidScene, "plane not visible in the target frustum");
    }
    // Keep image-space frequencies below 1/4 cycle per pixel.
    const double band = 0.25 * std::min(k.fx, k.fy) / dmax;
    frames.push_back(make_frame(p, band));
  }
  const PlaneFrame& base = frames[0];
  PlaneSpec mover_tex;
  PlaneFrame mover_frame;
  if (normalized.mover.has_value()) {
    mover_tex = normalized.planes[0];
    mover_tex.texture_id = 0;
    mover_tex.texture_freq = 0.0;
    mover_tex.texture_seed = normalized.seed * 31 + 997;
    const double dmax = max_frustum_depth(normalized, mover_tex);
    mover_frame = make_frame(mover_tex, 0.25 * std::min(k.fx, k.fy) / dmax);
    // share plane-0 axes so patch coordinates agree with the base plane
    mover_frame.e1 = base.e1;
    mover_frame.e2 = base.e2;
    mover_frame.origin = base.origin;
  }

  auto plane_uv = [](const PlaneFrame& f, const Eigen::Vector3d& x, double* u,
                     double* v) {
    const Eigen::Vector3d rel = x - f.origin;
    *u = f.e1.dot(rel);
    *v = f.e2.dot(rel);
  };

  auto in_patch = [&](double u, double v) {
    const MoverSpec& m = *normalized.mover;
    return std::abs(u - m.u0) <= m.half && std::abs(v - m.v0) <= m.half;
  };

  // Target view: rays in the target frame, mover at its rest position.
  auto trace_target = [&](const Eigen::Vector3d& ray) {
    Hit best;
    for (size_t i = 0; i < frames.size(); ++i) {
      const double s = hit_plane(normalized.planes[i].normal,
                                 normalized.planes[i].offset, ray);
      if (s > 0.0 && (best.s < 0.0 || s < best.s)) {
        best.s = s;
        best.plane = static_cast<int>(i);
        plane_uv(frames[i], s * ray, &best.u, &best.v);
      }
    }
    if (best.plane == 0 && normalized.mover.has_value() && in_patch(best.u, best.v)) {
      best.mover = true;
    }
    return best;
  };

  RenderedPair pair{ScalarField(w, h, 1), ScalarField(w, h, 1),
                    ScalarField(w, h, 1), ScalarField(w, h, 1),
                    ScalarField(w, h, 1), ScalarField(w, h, 1),
                    ValidityMask(w, h, false), std::nullopt, normalized};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d ray = ki * Eigen::Vector3d(x, y, 1.0);
      const Hit hit = trace_target(ray);
      if (hit.s < 0.0) {
        throw Error(ErrorCode::kInvalidScene, "target ray misses every plane");
      }
      const Eigen::Vector3d xt = hit.s * ray;
      pair.depth.at(x, y) = hit.s;
      pair.inv_depth.at(x, y) = 1.0 / hit.s;
      pair.target.at(x, y) = hit.mover ? texture_value(mover_frame, hit.u, hit.v)
                                       : texture_value(frames[hit.plane], hit.u, hit.v);
      pair.mover_mask.set(x, y, hit.mover);

      Eigen::Vector3d moved = xt;
      if (hit.mover) moved += normalized.mover->translation;
      const Eigen::Vector3d xs = pose.apply(moved);
      if (xs.z() > 1e-9) {
        pair.corr_x.at(x, y) = k.fx * xs.x() / xs.z() + k.cx;
        pair.corr_y.at(x, y) = k.fy * xs.y() / xs.z() + k.cy;
      } else {
        pair.corr_x.at(x, y) = -1e6;
        pair.corr_y.at(x, y) = -1e6;
      }
    }
  }

  // Source view: planes re-expressed in the source frame; the mover patch is
  // tested at its displaced position.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d ray = ki * Eigen::Vector3d(x, y, 1.0);
      double best_s = -1.0;
      double value = 0.0;
      for (size_t i = 0; i < frames.size(); ++i) {
        const Eigen::Vector3d ns = pose.rotation * normalized.planes[i].normal;
        const double os = normalized.planes[i].offset + ns.dot(pose.translation);
        const double s = hit_plane(ns, os, ray);
        if (s > 0.0 && (best_s < 0.0 || s < best_s)) {
          const Eigen::Vector3d xt = pose.inverse().apply(s * ray);
          double u, v;
          plane_uv(frames[i], xt, &u, &v);
          if (i == 0 && normalized.mover.has_value() && in_patch(u, v)) {
            // vacated region: the background texture continues underneath
          }
          best_s = s;
          value = texture_value(frames[i], u, v);
        }
      }
      if (normalized.mover.has_value()) {
        const Eigen::Vector3d m = normalized.mover->translation;
        const Eigen::Vector3d n0 = normalized.planes[0].normal;
        const Eigen::Vector3d ns = pose.rotation * n0;
        const double os =
            normalized.planes[0].offset + n0.dot(m) + ns.dot(pose.translation);
        const double s = hit_plane(ns, os, ray);
        if (s > 0.0 && (best_s < 0.0 || s < best_s + 1e-12)) {
          const Eigen::Vector3d xt_pre = pose.inverse().apply(s * ray) - m;
          double u, v;
          plane_uv(mover_frame, xt_pre, &u, &v);
          if (in_patch(u, v)) {
            best_s = s;
            value = texture_value(mover_frame, u, v);
          }
        }
      }
      if (best_s < 0.0) {
        throw Error(ErrorCode::kInvalidScene, "source ray misses every plane");
      }
      pair.source.at(x, y) = value;
    }
  }

  if (pose.translation.norm() >= 1e-12) {
    pair.essential = essential_from_pose(pose);
  }
  return pair;
}

LabeledCorrespondences sample_correspondences(const RenderedPair& pair, int n,
                                              double noise_sigma,
                                              double outlier_frac, uint64_t seed) {
  if (n < 5 || outlier_frac < 0.0 || outlier_frac >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "bad sampling parameters");
  }
  const SceneSpec& spec = pair.spec;
  const CameraIntrinsics& k = spec.intrinsics;
  const Eigen::Matrix3d ki = k.inverse_matrix();
  Rng rng(seed * 0x2545f4914f6cdd1dULL + 1);

  LabeledCorrespondences out;
  int attempts = 0;
  const int max_attempts = 1000 * n;
  while (static_cast<int>(out.matches.size()) < n) {
    if (++attempts > max_attempts) {
      throw Error(ErrorCode::kInsufficientStaticArea,
                  "could not draw enough static correspondences");
    }
    const double px = rng.uniform(1.0, spec.width - 2.0);
    const double py = rng.uniform(1.0, spec.height - 2.0);
    const Eigen::Vector3d ray = ki * Eigen::Vector3d(px, py, 1.0);

    // nearest static plane hit; reject mover pixels
    double best_s = -1.0;
    int best_plane = -1;
    for (size_t i = 0; i < spec.planes.size(); ++i) {
      const double s = hit_plane(spec.planes[i].normal, spec.planes[i].offset, ray);
      if (s > 0.0 && (best_s < 0.0 || s < best_s)) {
        best_s = s;
        best_plane = static_cast<int>(i);
      }
    }
    if (best_plane < 0) continue;
    if (best_plane == 0 && spec.mover.has_value()) {
      const int xi = static_cast<int>(std::lround(px));
      const int yi = static_cast<int>(std::lround(py));
      bool near_mover = false;
      for (int dy = -1; dy <= 1 && !near_mover; ++dy) {
        for (int dx = -1; dx <= 1 && !near_mover; ++dx) {
          const int qx = std::clamp(xi + dx, 0, spec.width - 1);
          const int qy = std::clamp(yi + dy, 0, spec.height - 1);
          near_mover = pair.mover_mask.at(qx, qy);
        }
      }
      if (near_mover) continue;
    }

    const Eigen::Vector3d xs = spec.pose.apply(best_s * ray);
    if (xs.z() <= 1e-9) continue;
    const double sx_pix = k.fx * xs.x() / xs.z() + k.cx;
    const double sy_pix = k.fy * xs.y() / xs.z() + k.cy;
    if (sx_pix < 0.0 || sx_pix > spec.width - 1.0 || sy_pix < 0.0 ||
        sy_pix > spec.height - 1.0) {
      continue;
    }
    Correspondence c;
    c.target = NormalizedCoord{ray.x(), ray.y()};
    c.source = NormalizedCoord{xs.x() / xs.z(), xs.y() / xs.z()};
    if (noise_sigma > 0.0) {
      c.source.x += noise_sigma * rng.gaussian();
      c.source.y += noise_sigma * rng.gaussian();
    }
    out.matches.push_back(c);
    out.is_inlier.push_back(true);
  }

  const int n_outliers = static_cast<int>(std::floor(outlier_frac * n));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_int(i + 1)]);
  }
  const double x_lo = (0.0 - k.cx) / k.fx;
  const double x_hi = (spec.width - 1.0 - k.cx) / k.fx;
  const double y_lo = (0.0 - k.cy) / k.fy;
  const double y_hi = (spec.height - 1.0 - k.cy) / k.fy;
  for (int i = 0; i < n_outliers; ++i) {
    Correspondence& c = out.matches[order[i]];
    c.source = NormalizedCoord{rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)};
    out.is_inlier[order[i]] = false;
  }
  return out;
}

SceneSpec read_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  SceneSpec spec;
  spec.planes.clear();
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
    std::istringstream vals(line.substr(eq + 1));
    if (key == "width") {
      vals >> spec.width;
    } else if (key == "height") {
      vals >> spec.height;
    } else if (key == "intrinsics") {
      vals >> spec.intrinsics.fx >> spec.intrinsics.fy >> spec.intrinsics.cx >>
          spec.intrinsics.cy;
    } else if (key == "rotation") {
      Vector6d xi = Vector6d::Zero();
      vals >> xi[0] >> xi[1] >> xi[2];
      spec.pose.rotation = Pose::exp(xi).rotation;
    } else if (key == "translation") {
      vals >> spec.pose.translation.x() >> spec.pose.translation.y() >>
          spec.pose.translation.z();
    } else if (key == "seed") {
      vals >> spec.seed;
    } else if (key == "plane") {
      PlaneSpec p;
      vals >> p.normal.x() >> p.normal.y() >> p.normal.z() >> p.offset >>
          p.texture_id >> p.texture_freq >> p.cross_amp >> p.texture_seed;
      spec.planes.push_back(p);
    } else if (key == "mover") {
      MoverSpec m;
      vals >> m.u0 >> m.v0 >> m.half >> m.translation.x() >> m.translation.y() >>
          m.translation.z();
      spec.mover = m;
    } else {
      throw Error(ErrorCode::kIo, path + ": unknown scene key '" + key + "'");
    }
    if (!vals) throw Error(ErrorCode::kIo, path + ": bad value for '" + key + "'");
  }
  if (spec.planes.empty()) {
    throw Error(ErrorCode::kInvalidScene, path + ": scene has no planes");
  }
  return spec;
}

void write_scene_spec(const SceneSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  const auto d = [](double v) { return format_double(v); };
  out << "width = " << spec.width << "\n";
  out << "height = " << spec.height << "\n";
  out << "intrinsics = " << d(spec.intrinsics.fx) << " " << d(spec.intrinsics.fy)
      << " " << d(spec.intrinsics.cx) << " " << d(spec.intrinsics.cy) << "\n";
  const Vector6d xi = Pose{spec.pose.rotation, Eigen::Vector3d::Zero()}.log();
  out << "rotation = " << d(xi[0]) << " " << d(xi[1]) << " " << d(xi[2]) << "\n";
  out << "translation = " << d(spec.pose.translation.x()) << " "
      << d(spec.pose.translation.y()) << " " << d(spec.pose.translation.z())
      << "\n";
  out << "seed = " << spec.seed << "\n";
  for (const PlaneSpec& p : spec.planes) {
    out << "plane = " << d(p.normal.x()) << " " << d(p.normal.y()) << " "
        << d(p.normal.z()) << " " << d(p.offset) << " " << p.texture_id << " "
        << d(p.texture_freq) << " " << d(p.cross_amp) << " " << p.texture_seed
        << "\n";
  }
  if (spec.mover.has_value()) {
    const MoverSpec& m = *spec.mover;
    out << "mover = " << d(m.u0) << " " << d(m.v0) << " " << d(m.half) << " "
        << d(m.translation.x()) << " " << d(m.translation.y()) << " "
        << d(m.translation.z()) << "\n";
  }
}

SceneSpec smooth_scene(uint64_t seed, int size) {
  SceneSpec spec;
  spec.width = size;
  spec.height = size;
  const double f = static_cast<double>(size);
  spec.intrinsics = CameraIntrinsics{f, f, 0.5 * (size - 1.0), 0.5 * (size - 1.0)};
  Rng rng(seed * 77 + 5);
  PlaneSpec plane;
  plane.normal = Eigen::Vector3d(rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15),
                                 1.0).normalized();
  plane.offset = 10.0;
  // fixed in scene units so doubling the resolution halves the image-space
  // frequency (the auto band limit would track the focal length instead)
  plane.texture_freq = 0.1;
  plane.texture_seed = seed;
  spec.planes = {plane};
  Vector6d xi = Vector6d::Zero();
  xi[1] = rng.uniform(-0.02, 0.02);  // small yaw
  spec.pose.rotation = Pose::exp(xi).rotation;
  spec.pose.translation =
      Eigen::Vector3d(0.5 + rng.uniform(-0.1, 0.1), rng.uniform(-0.05, 0.05),
                      rng.uniform(-0.05, 0.05));
  spec.seed = seed;
  return spec;
}

SceneSpec repeated_texture_scene(uint64_t seed, int size) {
  SceneSpec spec;
  spec.width = size;
  spec.height = size;
  const double f = static_cast<double>(size);
  spec.intrinsics = CameraIntrinsics{f, f, 0.5 * (size - 1.0), 0.5 * (size - 1.0)};
  PlaneSpec plane;
  plane.normal = Eigen::Vector3d(0.0, 0.0, 1.0);
  plane.offset = 10.0;
  plane.texture_id = 1;
  // about an 8 pixel image period at the plane depth
  plane.texture_freq = f / (8.0 * plane.offset);
  plane.cross_amp = 0.02;
  plane.texture_seed = seed;
  spec.planes = {plane};
  spec.pose.translation = Eigen::Vector3d(0.4, 0.0, 0.0);
  spec.seed = seed;
  return spec;
}

SceneSpec mover_scene(uint64_t seed, double mover_shift, int size) {
  SceneSpec spec = smooth_scene(seed, size);
  spec.planes[0].normal = Eigen::Vector3d(0.0, 0.0, 1.0);
  spec.pose = Pose{};
  spec.pose.translation = Eigen::Vector3d(0.5, 0.0, 0.0);
  MoverSpec mover;
  mover.u0 = 1.0;
  mover.v0 = 0.5;
  mover.half = 1.2;
  // lateral motion perpendicular to the epipolar lines; normalized-unit
  // displacement ~ translation / depth
  mover.translation = Eigen::Vector3d(0.0, mover_shift * spec.planes[0].offset, 0.0);
  spec.mover = mover;
  return spec;
}

}  // namespace epivo
