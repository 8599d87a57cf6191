#include "epivo/fivepoint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace epivo {

namespace {

// Dense polynomial in (x, y, z) of total degree <= 3, coefficient cube
// indexed by the three exponents.
struct Poly3 {
  double c[4][4][4] = {};

  Poly3 operator*(const Poly3& o) const {
    Poly3 r;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g + a + b < 4; ++g) {
          if (c[a][b][g] == 0.0) continue;
          for (int a2 = 0; a2 + a < 4; ++a2)
            for (int b2 = 0; b2 + b < 4; ++b2)
              for (int g2 = 0; a + a2 + b + b2 + g + g2 < 4; ++g2) {
                r.c[a + a2][b + b2][g + g2] += c[a][b][g] * o.c[a2][b2][g2];
              }
        }
    return r;
  }

  Poly3 operator+(const Poly3& o) const {
    Poly3 r;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g) r.c[a][b][g] = c[a][b][g] + o.c[a][b][g];
    return r;
  }

  Poly3 operator-(const Poly3& o) const {
    Poly3 r;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g) r.c[a][b][g] = c[a][b][g] - o.c[a][b][g];
    return r;
  }

  Poly3 scaled(double s) const {
    Poly3 r;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int g = 0; g < 4; ++g) r.c[a][b][g] = s * c[a][b][g];
    return r;
  }
};

// Monomial order used for the 10x20 elimination (Nister's ordering):
// x3 y3 x2y xy2 x2z x2 y2z y2 xyz xy | xz2 xz x yz2 yz y z3 z2 z 1
constexpr int kMonomials[20][3] = {
    {3, 0, 0}, {0, 3, 0}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1},
    {2, 0, 0}, {0, 2, 1}, {0, 2, 0}, {1, 1, 1}, {1, 1, 0},
    {1, 0, 2}, {1, 0, 1}, {1, 0, 0}, {0, 1, 2}, {0, 1, 1},
    {0, 1, 0}, {0, 0, 3}, {0, 0, 2}, {0, 0, 1}, {0, 0, 0}};

Eigen::Matrix<double, 1, 20> flatten(const Poly3& p) {
  Eigen::Matrix<double, 1, 20> row;
  for (int i = 0; i < 20; ++i) {
    row(i) = p.c[kMonomials[i][0]][kMonomials[i][1]][kMonomials[i][2]];
  }
  return row;
}

// Univariate polynomial helpers, coefficient index = power of z.
using ZPoly = std::vector<double>;

ZPoly zmul(const ZPoly& a, const ZPoly& b) {
  ZPoly r(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

ZPoly zsub(const ZPoly& a, const ZPoly& b) {
  ZPoly r(std::max(a.size(), b.size()), 0.0);
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  return r;
}

double zeval(const ZPoly& p, double z) {
  double v = 0.0;
  for (size_t i = p.size(); i-- > 0;) v = v * z + p[i];
  return v;
}

std::vector<double> real_roots(const ZPoly& poly) {
  // Trim negligible leading coefficients relative to the largest one.
  double maxc = 0.0;
  for (double c : poly) maxc = std::max(maxc, std::abs(c));
  if (maxc == 0.0) return {};
  int deg = static_cast<int>(poly.size()) - 1;
  while (deg > 0 && std::abs(poly[deg]) < 1e-13 * maxc) --deg;
  if (deg == 0) return {};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) companion(0, i) = -poly[deg - 1 - i] / poly[deg];
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    const std::complex<double> r = es.eigenvalues()(i);
    if (std::abs(r.imag()) < 1e-8 * std::max(1.0, std::abs(r.real()))) {
      roots.push_back(r.real());
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// SplitMix64; gives every RANSAC trial an independent, schedule-free stream.
uint64_t mix64(uint64_t v) {
  v += 0x9e3779b97f4a7c15ULL;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

}  // namespace

std::vector<EssentialMatrix> five_point(const std::vector<Correspondence>& cs) {
  if (cs.size() != 5) {
    throw Error(ErrorCode::kInvalidArgument, "five_point needs exactly 5 correspondences");
  }
  Eigen::Matrix<double, 5, 9> design;
  for (int i = 0; i < 5; ++i) {
    const Eigen::Vector3d t = cs[i].target.homogeneous();
    const Eigen::Vector3d s = cs[i].source.homogeneous();
    design.row(i) << s.x() * t.x(), s.x() * t.y(), s.x(), s.y() * t.x(),
        s.y() * t.y(), s.y(), t.x(), t.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 5, 9>> svd(
      design, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Rank below 5 means a null space larger than dimension 4.
  if (!(sv(3) > 0.0) || sv(4) / sv(3) < 1e-6) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "degenerate five-point configuration");
  }

  // Mix the null-space basis by a fixed generic rotation. The parametrization
  // below sets the coefficient of the last basis vector to 1, which fails
  // when the solution is orthogonal to it (common for symmetric geometries);
  // a generic mix leaves no such alignment.
  Eigen::Matrix4d mix;
  mix << 0.31, -0.47, 0.62, 0.55,
         0.73, 0.41, -0.22, 0.50,
         -0.35, 0.66, 0.59, 0.31,
         0.49, 0.42, -0.46, 0.60;
  const Eigen::Matrix4d q = Eigen::HouseholderQR<Eigen::Matrix4d>(mix).householderQ();
  const Eigen::Matrix<double, 9, 4> null_basis =
      svd.matrixV().rightCols<4>() * q;
  std::array<Eigen::Matrix3d, 4> basis;
  for (int b = 0; b < 4; ++b) {
    const Eigen::Matrix<double, 9, 1> v = null_basis.col(b);
    basis[b] = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data());
  }

  // Symbolic E = x*B0 + y*B1 + z*B2 + B3 with entries linear in (x, y, z).
  Poly3 esym[3][3];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      esym[r][c].c[1][0][0] = basis[0](r, c);
      esym[r][c].c[0][1][0] = basis[1](r, c);
      esym[r][c].c[0][0][1] = basis[2](r, c);
      esym[r][c].c[0][0][0] = basis[3](r, c);
    }
  }

  // Ten cubic constraints: det(E) = 0 and 2 E E^T E - tr(E E^T) E = 0.
  Eigen::Matrix<double, 10, 20> constraints;
  {
    Poly3 det = esym[0][0] * (esym[1][1] * esym[2][2] - esym[1][2] * esym[2][1]) -
                esym[0][1] * (esym[1][0] * esym[2][2] - esym[1][2] * esym[2][0]) +
                esym[0][2] * (esym[1][0] * esym[2][1] - esym[1][1] * esym[2][0]);
    constraints.row(0) = flatten(det);

    Poly3 eet[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        eet[r][c] = esym[r][0] * esym[c][0] + esym[r][1] * esym[c][1] +
                    esym[r][2] * esym[c][2];
    const Poly3 tr = eet[0][0] + eet[1][1] + eet[2][2];
    int row = 1;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        Poly3 m = (eet[r][0] * esym[0][c] + eet[r][1] * esym[1][c] +
                   eet[r][2] * esym[2][c]).scaled(2.0) -
                  tr * esym[r][c];
        constraints.row(row++) = flatten(m);
      }
    }
  }

  // Gauss-Jordan with partial pivoting over the first ten columns.
  for (int col = 0; col < 10; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 10; ++r) {
      if (std::abs(constraints(r, col)) > std::abs(constraints(pivot, col))) pivot = r;
    }
    if (std::abs(constraints(pivot, col)) < 1e-14) {
      throw Error(ErrorCode::kDegenerateConfiguration,
                  "rank-deficient constraint system");
    }
    constraints.row(col).swap(constraints.row(pivot));
    constraints.row(col) /= constraints(col, col);
    for (int r = 0; r < 10; ++r) {
      if (r != col && constraints(r, col) != 0.0) {
        constraints.row(r) -= constraints(r, col) * constraints.row(col);
      }
    }
  }

  // Rows by leading monomial: 4 = x2z, 5 = x2, 6 = y2z, 7 = y2, 8 = xyz,
  // 9 = xy. Pairing row(m*z) - z*row(m) eliminates the degree-2 leading
  // terms and leaves equations of the form x*p1(z) + y*p2(z) + p3(z) = 0.
  struct Row {
    ZPoly px, py, pc;
  };
  auto make_row = [&](int top, int bot) {
    const auto& t = constraints;
    // tail columns: 10..19 = xz2 xz x yz2 yz y z3 z2 z 1
    Row r;
    r.px = {t(top, 12), t(top, 11) - t(bot, 12), t(top, 10) - t(bot, 11), -t(bot, 10)};
    r.py = {t(top, 15), t(top, 14) - t(bot, 15), t(top, 13) - t(bot, 14), -t(bot, 13)};
    r.pc = {t(top, 19), t(top, 18) - t(bot, 19), t(top, 17) - t(bot, 18),
            t(top, 16) - t(bot, 17), -t(bot, 16)};
    return r;
  };
  const Row k = make_row(4, 5);
  const Row l = make_row(6, 7);
  const Row m = make_row(8, 9);

  // det of the 3x3 polynomial system; degree 10 in z.
  const ZPoly t1 = zmul(k.px, zsub(zmul(l.py, m.pc), zmul(l.pc, m.py)));
  const ZPoly t2 = zmul(k.py, zsub(zmul(l.px, m.pc), zmul(l.pc, m.px)));
  const ZPoly t3 = zmul(k.pc, zsub(zmul(l.px, m.py), zmul(l.py, m.px)));
  const ZPoly poly = zsub(zsub(t1, t2), zsub(ZPoly{0.0}, t3));

  std::vector<EssentialMatrix> out;
  for (double z : real_roots(poly)) {
    Eigen::Matrix3d bz;
    bz << zeval(k.px, z), zeval(k.py, z), zeval(k.pc, z),
          zeval(l.px, z), zeval(l.py, z), zeval(l.pc, z),
          zeval(m.px, z), zeval(m.py, z), zeval(m.pc, z);
    Eigen::JacobiSVD<Eigen::Matrix3d> nsvd(bz, Eigen::ComputeFullV);
    const Eigen::Vector3d sol = nsvd.matrixV().col(2);
    if (std::abs(sol.z()) < 1e-12) continue;
    const double x = sol.x() / sol.z();
    const double y = sol.y() / sol.z();
    Eigen::Matrix3d e = x * basis[0] + y * basis[1] + z * basis[2] + basis[3];
    if (!(e.norm() > 0.0)) continue;
    EssentialMatrix cand(e);
    double max_res = 0.0;
    for (const Correspondence& c : cs) {
      max_res = std::max(max_res, epipolar_residual(c, cand));
    }
    if (max_res < 1e-6) out.push_back(cand);
  }
  return out;
}

double sampson_error(const EssentialMatrix& e, const Correspondence& c) {
  const Eigen::Vector3d pt = c.target.homogeneous();
  const Eigen::Vector3d ps = c.source.homogeneous();
  const Eigen::Vector3d ept = e.matrix() * pt;
  const Eigen::Vector3d etps = e.matrix().transpose() * ps;
  const double num = ps.dot(ept);
  const double den = ept.x() * ept.x() + ept.y() * ept.y() +
                     etps.x() * etps.x() + etps.y() * etps.y();
  if (den < 1e-18) return std::numeric_limits<double>::infinity();
  return num * num / den;
}

RansacResult ransac_essential(const std::vector<Correspondence>& cs,
                              const RansacOptions& opts) {
  const int n = static_cast<int>(cs.size());
  if (n < 5) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "need at least 5 correspondences");
  }
  if (!(opts.threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must be positive");
  }

  bool found = false;
  Eigen::Matrix3d best_e;
  int best_count = -1;
  double best_score = std::numeric_limits<double>::infinity();
  int iters_run = 0;
  int iter_budget = opts.max_iters;

  for (int trial = 0; trial < iter_budget; ++trial) {
    ++iters_run;
    uint64_t state = mix64(opts.seed ^ mix64(static_cast<uint64_t>(trial) + 1));
    std::array<int, 5> idx{};
    for (int i = 0; i < 5; ++i) {
      bool fresh = false;
      while (!fresh) {
        state = mix64(state);
        idx[i] = static_cast<int>(state % static_cast<uint64_t>(n));
        fresh = true;
        for (int j = 0; j < i; ++j) fresh = fresh && idx[j] != idx[i];
      }
    }
    std::vector<Correspondence> sample;
    sample.reserve(5);
    for (int i : idx) sample.push_back(cs[i]);

    std::vector<EssentialMatrix> candidates;
    try {
      candidates = five_point(sample);
    } catch (const Error&) {
      continue;  // degenerate minimal set
    }
    for (const EssentialMatrix& cand : candidates) {
      int count = 0;
      double score = 0.0;
      for (const Correspondence& c : cs) {
        const double err = sampson_error(cand, c);
        if (err < opts.threshold) {
          ++count;
          score += err;
        }
      }
      if (count > best_count || (count == best_count && score < best_score)) {
        best_count = count;
        best_score = score;
        best_e = cand.matrix();
        found = true;
        if (opts.adaptive && count > 0) {
          const double w = static_cast<double>(count) / n;
          const double denom = std::log1p(-std::min(0.999999, std::pow(w, 5)));
          if (denom < 0.0) {
            const int needed =
                static_cast<int>(std::ceil(std::log(1e-3) / denom));
            iter_budget = std::min(iter_budget, std::max(trial + 1, needed));
          }
        }
      }
    }
  }

  if (!found || best_count < 5) {
    throw Error(ErrorCode::kNoModelFound, "no non-degenerate model found");
  }
  RansacResult result{EssentialMatrix(best_e), {}, best_count, iters_run};
  result.inlier_mask.resize(n);
  for (int i = 0; i < n; ++i) {
    result.inlier_mask[i] = sampson_error(result.best, cs[i]) < opts.threshold;
  }
  return result;
}

namespace {

// Midpoint of the common perpendicular between the two viewing rays,
// expressed in the target frame. Returns false for near-parallel rays.
bool triangulate_midpoint(const Correspondence& c, const Pose& pose,
                          Eigen::Vector3d* point) {
  const Eigen::Vector3d d1 = c.target.homogeneous();
  const Eigen::Vector3d center = -(pose.rotation.transpose() * pose.translation);
  const Eigen::Vector3d d2 = pose.rotation.transpose() * c.source.homogeneous();
  const double a = d1.dot(d1);
  const double b = d1.dot(d2);
  const double cc = d2.dot(d2);
  const double det = a * cc - b * b;
  if (std::abs(det) < 1e-14) return false;
  const double d = d1.dot(center);
  const double e = d2.dot(center);
  const double s = (cc * d - b * e) / det;
  const double u = (b * d - a * e) / det;
  *point = 0.5 * (s * d1 + (center + u * d2));
  return true;
}

}  // namespace

PoseHypothesis decompose_essential(const EssentialMatrix& e,
                                   const std::vector<Correspondence>& inliers) {
  if (inliers.empty()) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                "decomposition needs at least one inlier");
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(e.matrix(),
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u.col(2) *= -1.0;
  if (v.determinant() < 0.0) v.col(2) *= -1.0;
  Eigen::Matrix3d w;
  w << 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
  const Eigen::Matrix3d r1 = u * w * v.transpose();
  const Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2);

  const std::array<Pose, 4> hypotheses = {
      Pose{r1, t}, Pose{r1, -t}, Pose{r2, t}, Pose{r2, -t}};
  std::array<int, 4> votes{};
  for (int h = 0; h < 4; ++h) {
    for (const Correspondence& c : inliers) {
      Eigen::Vector3d x;
      if (!triangulate_midpoint(c, hypotheses[h], &x)) continue;
      const double z_target = x.z();
      const double z_source = (hypotheses[h].rotation * x + hypotheses[h].translation).z();
      if (z_target > 0.0 && z_source > 0.0) ++votes[h];
    }
  }
  int best = 0;
  for (int h = 1; h < 4; ++h) {
    if (votes[h] > votes[best]) best = h;
  }
  int runner_up = -1;
  for (int h = 0; h < 4; ++h) {
    if (h != best && votes[h] == votes[best]) runner_up = h;
  }
  if (runner_up >= 0) {
    throw Error(ErrorCode::kAmbiguousCheirality,
                "cheirality vote tied between hypotheses");
  }
  return PoseHypothesis{hypotheses[best], votes[best]};
}

}  // namespace epivo
