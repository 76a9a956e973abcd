#include "flatflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace flatflow::kernels {

namespace {

void tangent_frame(const Vec3& n, Vec3& t1, Vec3& t2) {
  const Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  t1 = (a - a.dot(n) * n).normalized();
  t2 = n.cross(t1);
}

struct HeightFit {
  double a, b, c, d, e;
  bool ok;
};

HeightFit fit_heights(const DiscreteSurface& surface, const std::vector<int>& ring, int v,
                      const Vec3& n, const Vec3& t1, const Vec3& t2, double scale) {
  const int m = static_cast<int>(ring.size()) - 1;
  Eigen::MatrixXd A(m, 5);
  Eigen::VectorXd rhs(m);
  int row = 0;
  const Vec3& x = surface.position(v);
  for (int q : ring) {
    if (q == v) continue;
    const Vec3 d = (surface.position(q) - x) / scale;
    const double u = d.dot(t1), w = d.dot(t2);
    A.row(row) << u * u, u * w, w * w, u, w;
    rhs(row) = d.dot(n);
    ++row;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < 5) return {0, 0, 0, 0, 0, false};
  const Eigen::VectorXd c = qr.solve(rhs);
  // Undo the coordinate scaling: h = scale * H(u/scale, w/scale).
  return {c(0) / scale, c(1) / scale, c(2) / scale, c(3), c(4), true};
}

}  // namespace

QuadricFit fit_vertex_quadric(const DiscreteSurface& surface, const Vec3& normal_guess, int v) {
  QuadricFit out;
  std::vector<int> ring = surface.ring(v, 2);
  if (ring.size() < 7) ring = surface.ring(v, 3);

  double scale = 0.0;
  for (int q : surface.neighbors(v)) scale += (surface.position(q) - surface.position(v)).norm();
  scale /= static_cast<double>(surface.neighbors(v).size());

  Vec3 n = normal_guess.normalized();
  HeightFit f{};
  Vec3 t1, t2;
  for (int pass = 0; pass < 2; ++pass) {
    tangent_frame(n, t1, t2);
    f = fit_heights(surface, ring, v, n, t1, t2, scale);
    if (!f.ok) return out;
    if (pass == 0) n = (n - f.d * t1 - f.e * t2).normalized();
  }

  // Graph h(u, w) over the (t1, t2) plane with the outward normal on the +h
  // side. First fundamental form I = Id + g g^T, second II = Hess / |N|.
  const Eigen::Vector2d g(f.d, f.e);
  const double len = std::sqrt(1.0 + g.squaredNorm());
  Eigen::Matrix2d I = Eigen::Matrix2d::Identity() + g * g.transpose();
  Eigen::Matrix2d II;
  II << 2.0 * f.a, f.b, f.b, 2.0 * f.c;
  II /= len;
  // I^{-1/2} via eigen-decomposition of the SPD first fundamental form.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ie(I);
  const Eigen::Matrix2d Ih =
      ie.eigenvectors() * ie.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      ie.eigenvectors().transpose();
  // Curvature operator with the convention H >= 0 for convex sets: B = -S.
  const Eigen::Matrix2d Bsym = -(Ih * II * Ih);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> be(0.5 * (Bsym + Bsym.transpose()));
  const Vec3 e1 = t1 + f.d * n, e2 = t2 + f.e * n;
  Vec3 dirs[2];
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector2d c = Ih * be.eigenvectors().col(i);
    dirs[i] = (c(0) * e1 + c(1) * e2).normalized();
  }
  out.normal = (n - f.d * t1 - f.e * t2).normalized();
  // eigenvalues ascending: index 1 is the larger.
  out.k1 = be.eigenvalues()(1);
  out.k2 = be.eigenvalues()(0);
  out.dir1 = dirs[1];
  out.dir2 = out.normal.cross(out.dir1);
  out.ok = std::isfinite(out.k1) && std::isfinite(out.k2);
  return out;
}

// ---------------------------------------------------------------------------

SpatialHash::SpatialHash(const std::vector<Vec3>& points, double cell) : cell_(cell) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if (points.empty()) lo = hi = Vec3::Zero();
  origin_ = lo;
  // Coarser cells only widen the candidate superset; keep the grid no larger
  // than a few cells per point.
  const double extent = (hi - lo).maxCoeff();
  const double cells = std::max(64.0, 8.0 * static_cast<double>(points.size()));
  cell_ = std::max(cell_, extent / std::cbrt(cells));
  for (int d = 0; d < 3; ++d)
    dims_[static_cast<std::size_t>(d)] =
        std::max<long>(1, static_cast<long>(std::floor((hi(d) - lo(d)) / cell_)) + 1);
  const long total = dims_[0] * dims_[1] * dims_[2];
  std::vector<long> count(static_cast<std::size_t>(total) + 1, 0);
  std::vector<long> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    keys[i] = key(cell_of(points[i]));
    ++count[static_cast<std::size_t>(keys[i]) + 1];
  }
  for (std::size_t i = 1; i < count.size(); ++i) count[i] += count[i - 1];
  starts_ = count;
  items_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    items_[static_cast<std::size_t>(count[static_cast<std::size_t>(keys[i])]++)] =
        static_cast<int>(i);
}

std::array<long, 3> SpatialHash::cell_of(const Vec3& x) const {
  std::array<long, 3> c{};
  for (int d = 0; d < 3; ++d) {
    const auto dd = static_cast<std::size_t>(d);
    const double t = std::floor((x(d) - origin_(d)) / cell_);
    c[dd] = std::clamp(static_cast<long>(std::max(-1.0, std::min(t, 1e15))), 0L, dims_[dd] - 1);
  }
  return c;
}

long SpatialHash::key(const std::array<long, 3>& c) const {
  return (c[2] * dims_[1] + c[1]) * dims_[0] + c[0];
}

double tangent_ball_radius(const DiscreteSurface& surface, const std::vector<Vec3>& normals,
                           const SpatialHash& hash, double search_radius, int v) {
  const Vec3& p = surface.position(v);
  const Vec3& n = normals[static_cast<std::size_t>(v)];
  std::vector<int> near = surface.ring(v, 3);
  std::sort(near.begin(), near.end());
  double best = std::numeric_limits<double>::infinity();
  hash.for_each_near(p, search_radius, [&](int q) {
    if (std::binary_search(near.begin(), near.end(), q)) return;
    const Vec3 d = surface.position(q) - p;
    const double dn = std::abs(d.dot(n));
    const double d2 = d.squaredNorm();
    if (d2 > search_radius * search_radius) return;
    if (dn <= 0.0) return;
    best = std::min(best, d2 / (2.0 * dn));
  });
  return best;
}

std::array<double, 3> corner_cotangents(const DiscreteSurface& surface, int face) {
  const Triangle& t = surface.triangles()[static_cast<std::size_t>(face)];
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const Vec3& a = surface.position(t[static_cast<std::size_t>(c)]);
    const Vec3& b = surface.position(t[static_cast<std::size_t>((c + 1) % 3)]);
    const Vec3& d = surface.position(t[static_cast<std::size_t>((c + 2) % 3)]);
    const Vec3 u = b - a, w = d - a;
    out[static_cast<std::size_t>(c)] = u.dot(w) / u.cross(w).norm();
  }
  return out;
}

namespace serial {

std::vector<QuadricFit> fit_quadrics(const DiscreteSurface& surface,
                                     const std::vector<Vec3>& normal_guess) {
  std::vector<QuadricFit> out(static_cast<std::size_t>(surface.vertex_count()));
  for (int v = 0; v < surface.vertex_count(); ++v)
    out[static_cast<std::size_t>(v)] =
        fit_vertex_quadric(surface, normal_guess[static_cast<std::size_t>(v)], v);
  return out;
}

std::vector<double> tangent_ball_radii(const DiscreteSurface& surface,
                                       const std::vector<Vec3>& normals, double search_radius) {
  const SpatialHash hash(surface.positions(), search_radius);
  std::vector<double> out(static_cast<std::size_t>(surface.vertex_count()));
  for (int v = 0; v < surface.vertex_count(); ++v)
    out[static_cast<std::size_t>(v)] = tangent_ball_radius(surface, normals, hash, search_radius, v);
  return out;
}

std::vector<std::array<double, 3>> cotangents(const DiscreteSurface& surface) {
  std::vector<std::array<double, 3>> out(surface.triangles().size());
  for (std::size_t f = 0; f < out.size(); ++f)
    out[f] = corner_cotangents(surface, static_cast<int>(f));
  return out;
}

}  // namespace serial

}  // namespace flatflow::kernels
