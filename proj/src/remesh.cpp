#include "flatflow/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/SparseLU>

#include "flatflow/laplace_beltrami.hpp"

namespace flatflow {

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
}

// Second derivatives of the periodic cubic spline through (s_i, y_i) with
// period L.
Eigen::MatrixXd periodic_spline_moments(const std::vector<double>& s, const Eigen::MatrixXd& y, double L) {
  const int n = static_cast<int>(s.size());
  auto gap = [&](int i) {
    const double a = s[static_cast<std::size_t>(i)];
    const double b = i + 1 < n ? s[static_cast<std::size_t>(i) + 1] : s[0] + L;
    return b - a;
  };
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs(n, y.cols());
  for (int i = 0; i < n; ++i) {
    const int p = (i + n - 1) % n, q = (i + 1) % n;
    const double hp = gap(p), hn = gap(i);
    trip.emplace_back(i, p, hp / 6.0);
    trip.emplace_back(i, i, (hp + hn) / 3.0);
    trip.emplace_back(i, q, hn / 6.0);
    rhs.row(i) = (y.row(q) - y.row(i)) / hn - (y.row(i) - y.row(p)) / hp;
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SparseMatrix> lu(A);
  if (lu.info() != Eigen::Success) throw GeometryError("spline resampling failed");
  return lu.solve(rhs);
}

std::vector<Vec2> resample_component(const std::vector<Vec2>& pts) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd y(n, 2);
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    y.row(i) = pts[static_cast<std::size_t>(i)].transpose();
    if (i > 0) s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i) - 1] + (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(i) - 1]).norm();
  }
  const double L = s.back() + (pts.front() - pts.back()).norm();
  const Eigen::MatrixXd m = periodic_spline_moments(s, y, L);
  auto eval = [&](int i, double u) -> Vec2 {
    const int q = (i + 1) % n;
    const double hn = (i + 1 < n ? s[static_cast<std::size_t>(i) + 1] : L) - s[static_cast<std::size_t>(i)];
    const double a = (hn - u) / hn, b = u / hn;
    const Eigen::RowVector2d r = a * y.row(i) + b * y.row(q) +
                                 ((a * a * a - a) * m.row(i) + (b * b * b - b) * m.row(q)) * hn * hn / 6.0;
    return r.transpose();
  };
  // Arc length of the spline on a fine sub-grid, then inverse interpolation.
  constexpr int sub = 16;
  std::vector<double> arc{0.0};
  std::vector<std::pair<int, double>> where{{0, 0.0}};
  Vec2 prev = eval(0, 0.0);
  for (int i = 0; i < n; ++i) {
    const double hn = (i + 1 < n ? s[static_cast<std::size_t>(i) + 1] : L) - s[static_cast<std::size_t>(i)];
    for (int k = 1; k <= sub; ++k) {
      const double u = hn * k / sub;
      const Vec2 p = eval(i, u);
      arc.push_back(arc.back() + (p - prev).norm());
      where.emplace_back(i, u);
      prev = p;
    }
  }
  const double total = arc.back();
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(n));
  std::size_t k = 0;
  for (int j = 0; j < n; ++j) {
    const double target = total * j / n;
    while (k + 1 < arc.size() && arc[k + 1] < target) ++k;
    const double frac = arc[k + 1] > arc[k] ? (target - arc[k]) / (arc[k + 1] - arc[k]) : 0.0;
    auto [i0, u0] = where[k];
    const auto [i1, u1] = where[k + 1];
    if (i1 != i0) {
      // where[k] closes segment i0; restart at the head of i1.
      i0 = i1;
      u0 = 0.0;
    }
    out.push_back(eval(i0, u0 + frac * (u1 - u0)));
  }
  return out;
}

}  // namespace

MeshQuality mesh_quality(const DiscreteSurface& s) {
  MeshQuality q;
  double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0;
  if (s.is_curve()) {
    for (int v = 0; v < s.vertex_count(); ++v) {
      const double l = (s.position(s.next(v)) - s.position(v)).norm();
      lmin = std::min(lmin, l);
      lmax = std::max(lmax, l);
    }
  } else {
    for (const auto& t : s.triangles()) {
      for (int c = 0; c < 3; ++c) {
        const Vec3& a = s.position(t[static_cast<std::size_t>(c)]);
        const Vec3& b = s.position(t[static_cast<std::size_t>((c + 1) % 3)]);
        const Vec3& d = s.position(t[static_cast<std::size_t>((c + 2) % 3)]);
        const double l = (b - a).norm();
        lmin = std::min(lmin, l);
        lmax = std::max(lmax, l);
        q.min_angle_deg = std::min(q.min_angle_deg, angle_deg(b - a, d - a));
      }
    }
  }
  q.edge_ratio = lmax / lmin;
  return q;
}

bool needs_remesh(const DiscreteSurface& s, const RemeshOptions& o) {
  if (o.policy == RemeshPolicy::Off) return false;
  const MeshQuality q = mesh_quality(s);
  if (s.is_curve()) {
    if (o.policy == RemeshPolicy::Quality3D) return false;
    return q.edge_ratio > o.arc_length_ratio;
  }
  if (o.policy == RemeshPolicy::ArcLength2D) return false;
  return q.min_angle_deg < o.min_angle_deg || q.edge_ratio > o.edge_ratio_cap;
}

DiscreteSurface resample_arc_length(const DiscreteSurface& curve) {
  if (!curve.is_curve()) throw GeometryError("arc-length resampling requires a curve");
  std::vector<std::vector<Vec2>> comps;
  for (const auto& c : curve.curve_components()) comps.push_back(resample_component(c));
  return DiscreteSurface::from_curves(comps);
}

DiscreteSurface improve_mesh(const DiscreteSurface& mesh, int passes) {
  if (mesh.is_curve()) throw GeometryError("mesh improvement requires a triangle mesh");
  std::vector<Triangle> tris = mesh.triangles();
  std::vector<Vec3> pos = mesh.positions();

  // Edge flips towards the Delaunay condition; valence stays at least 3.
  for (int sweep = 0; sweep < 10; ++sweep) {
    std::map<std::pair<int, int>, std::pair<int, int>> edge_faces;  // directed edge -> (face, corner)
    for (std::size_t f = 0; f < tris.size(); ++f)
      for (int c = 0; c < 3; ++c)
        edge_faces[{tris[f][static_cast<std::size_t>(c)], tris[f][static_cast<std::size_t>((c + 1) % 3)]}] = {static_cast<int>(f), c};
    std::vector<int> valence(pos.size(), 0);
    for (const auto& t : tris)
      for (int v : t) ++valence[static_cast<std::size_t>(v)];
    std::vector<char> touched(tris.size(), 0);
    int flips = 0;
    for (const auto& [edge, fc] : edge_faces) {
      const auto [a, b] = edge;
      if (a > b) continue;
      const auto it = edge_faces.find({b, a});
      if (it == edge_faces.end()) continue;
      const int f0 = fc.first, f1 = it->second.first;
      if (touched[static_cast<std::size_t>(f0)] || touched[static_cast<std::size_t>(f1)]) continue;
      const int c = tris[static_cast<std::size_t>(f0)][static_cast<std::size_t>((fc.second + 2) % 3)];
      const int d = tris[static_cast<std::size_t>(f1)][static_cast<std::size_t>((it->second.second + 2) % 3)];
      if (c == d || valence[static_cast<std::size_t>(a)] <= 3 || valence[static_cast<std::size_t>(b)] <= 3) continue;
      if (edge_faces.count({c, d}) || edge_faces.count({d, c})) continue;
      const Vec3 &pa = pos[static_cast<std::size_t>(a)], &pb = pos[static_cast<std::size_t>(b)],
                 &pc = pos[static_cast<std::size_t>(c)], &pd = pos[static_cast<std::size_t>(d)];
      const double opposite = angle_deg(pa - pc, pb - pc) + angle_deg(pa - pd, pb - pd);
      if (opposite <= 180.0 + 1e-9) continue;
      // The flipped pair must keep orientation consistent with the old pair.
      const Vec3 n_old = (pb - pa).cross(pc - pa) + (pa - pb).cross(pd - pb);
      const Vec3 n0 = (pd - pc).cross(pa - pc);
      const Vec3 n1 = (pc - pd).cross(pb - pd);
      if (n0.dot(n_old) <= 0.0 || n1.dot(n_old) <= 0.0) continue;
      tris[static_cast<std::size_t>(f0)] = {c, a, d};
      tris[static_cast<std::size_t>(f1)] = {d, b, c};
      touched[static_cast<std::size_t>(f0)] = touched[static_cast<std::size_t>(f1)] = 1;
      --valence[static_cast<std::size_t>(a)];
      --valence[static_cast<std::size_t>(b)];
      ++valence[static_cast<std::size_t>(c)];
      ++valence[static_cast<std::size_t>(d)];
      ++flips;
    }
    if (flips == 0) break;
  }

  DiscreteSurface s = DiscreteSurface::from_mesh(pos, tris);
  // Tangential smoothing: move each vertex towards the area-weighted centroid
  // of its incident triangles, removing the normal component.
  for (int pass = 0; pass < passes; ++pass) {
    const auto normals = area_normals(s);
    std::vector<Vec3> next = s.positions();
    for (int v = 0; v < s.vertex_count(); ++v) {
      Vec3 centroid = Vec3::Zero();
      double w = 0.0;
      for (int f : s.vertex_faces(v)) {
        const Triangle& t = s.triangles()[static_cast<std::size_t>(f)];
        const double area = 0.5 * (s.position(t[1]) - s.position(t[0])).cross(s.position(t[2]) - s.position(t[0])).norm();
        centroid += area * (s.position(t[0]) + s.position(t[1]) + s.position(t[2])) / 3.0;
        w += area;
      }
      Vec3 d = centroid / w - s.position(v);
      const Vec3& n = normals[static_cast<std::size_t>(v)];
      d -= d.dot(n) * n;
      next[static_cast<std::size_t>(v)] += 0.5 * d;
    }
    s = s.with_positions(std::move(next));
  }
  return s;
}

DiscreteSurface restore_volume(const DiscreteSurface& s, const std::vector<double>& target) {
  const auto normals = area_normals(s);
  const auto w = offset_volume_weights(s, normals);
  const auto current = measure(s).volume;
  const int nc = s.component_count();
  std::vector<std::array<double, 3>> poly(static_cast<std::size_t>(nc), {0.0, 0.0, 0.0});
  for (int v = 0; v < s.vertex_count(); ++v)
    for (std::size_t k = 0; k < 3; ++k) poly[static_cast<std::size_t>(s.component_of(v))][k] += w[static_cast<std::size_t>(v)][k];
  std::vector<double> shift(static_cast<std::size_t>(nc), 0.0);
  for (int c = 0; c < nc; ++c) {
    const auto& p = poly[static_cast<std::size_t>(c)];
    const double goal = target[static_cast<std::size_t>(c)] - current[static_cast<std::size_t>(c)];
    double t = 0.0;
    for (int it = 0; it < 20; ++it) {
      const double f = t * (p[0] + t * (p[1] / 2.0 + t * p[2] / 3.0)) - goal;
      const double df = p[0] + t * (p[1] + t * p[2]);
      const double dt = f / df;
      t -= dt;
      if (std::abs(dt) <= 1e-16 * (1.0 + std::abs(t))) break;
    }
    shift[static_cast<std::size_t>(c)] = t;
  }
  std::vector<Vec3> pos = s.positions();
  for (int v = 0; v < s.vertex_count(); ++v)
    pos[static_cast<std::size_t>(v)] += shift[static_cast<std::size_t>(s.component_of(v))] * normals[static_cast<std::size_t>(v)];
  return s.with_positions(std::move(pos));
}

DiscreteSurface remesh(const DiscreteSurface& s, const RemeshOptions& o, bool* changed) {
  if (changed) *changed = false;
  if (!needs_remesh(s, o)) return s;
  const auto volume = measure(s).volume;
  DiscreteSurface out = s.is_curve() ? resample_arc_length(s) : improve_mesh(s, o.smoothing_passes);
  out = restore_volume(out, volume);
  if (changed) *changed = true;
  return out;
}

}  // namespace flatflow
