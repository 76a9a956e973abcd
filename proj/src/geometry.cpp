#include "flatflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "flatflow/kernels.hpp"

namespace flatflow {

namespace {

double diag_of(const std::vector<Vec3>& pts) {
  if (pts.empty()) return 0.0;
  Vec3 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

double cross2(const Vec3& a, const Vec3& b) { return a.x() * b.y() - a.y() * b.x(); }

// Clockwise rotation in the plane: outward normal of a counter-clockwise tangent.
Vec3 rot_cw(const Vec3& t) { return {t.y(), -t.x(), 0.0}; }

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

std::string vertex_list(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size() && i < 8; ++i) os << (i ? ", " : "") << v[i];
  if (v.size() > 8) os << ", ...";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

DiscreteSurface DiscreteSurface::from_curves(const std::vector<std::vector<Vec2>>& components,
                                             GeometryOptions options) {
  if (components.empty()) throw GeometryError("curve has no components");
  auto topo = std::make_shared<Topology>();
  topo->mode = Mode::Curve2D;
  std::vector<Vec3> pos;
  int comp = 0;
  for (const auto& c : components) {
    if (c.size() < 3) throw GeometryError("curve component with fewer than 3 vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Vec2& p = c[i];
      const Vec2& q = c[(i + 1) % c.size()];
      area2 += p.x() * q.y() - q.x() * p.y();
    }
    std::vector<Vec2> pts = c;
    if (area2 < 0.0) std::reverse(pts.begin(), pts.end());
    const int base = static_cast<int>(pos.size());
    const int m = static_cast<int>(pts.size());
    for (int i = 0; i < m; ++i) {
      pos.emplace_back(pts[static_cast<std::size_t>(i)].x(), pts[static_cast<std::size_t>(i)].y(),
                       0.0);
      topo->next.push_back(base + (i + 1) % m);
      topo->prev.push_back(base + (i + m - 1) % m);
      topo->component.push_back(comp);
    }
    ++comp;
  }
  topo->component_count = comp;
  topo->neighbors.resize(pos.size());
  topo->vertex_faces.resize(pos.size());
  for (std::size_t v = 0; v < pos.size(); ++v) {
    auto& nb = topo->neighbors[v];
    nb = {topo->prev[v], topo->next[v]};
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  const double eps = options.eps_rel * diag_of(pos);
  DiscreteSurface s(std::move(topo), std::move(pos), eps);
  if (auto bad = s.degenerate_vertices(); !bad.empty())
    throw GeometryError("degenerate curve: edge below length floor at vertices " +
                        vertex_list(bad));
  return s;
}

DiscreteSurface DiscreteSurface::from_mesh(std::vector<Vec3> vertices,
                                           std::vector<Triangle> triangles,
                                           GeometryOptions options) {
  const int nv = static_cast<int>(vertices.size());
  if (nv == 0 || triangles.empty()) throw GeometryError("empty mesh");
  for (const auto& t : triangles)
    for (int i : t)
      if (i < 0 || i >= nv) throw GeometryError("triangle index out of range");

  // Directed edge bookkeeping: closed and oriented iff every directed edge
  // occurs once and its reverse occurs once.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : triangles)
    for (int c = 0; c < 3; ++c) {
      const int a = t[static_cast<std::size_t>(c)], b = t[static_cast<std::size_t>((c + 1) % 3)];
      if (a == b) throw GeometryError("triangle with repeated vertex");
      ++directed[{a, b}];
    }
  for (const auto& [e, count] : directed) {
    if (count > 1)
      throw GeometryError("mesh is non-orientable or non-manifold at edge (" +
                          std::to_string(e.first) + ", " + std::to_string(e.second) + ")");
    const auto rev = directed.find({e.second, e.first});
    if (rev == directed.end())
      throw GeometryError("mesh is not closed: boundary edge (" + std::to_string(e.first) + ", " +
                          std::to_string(e.second) + ")");
  }

  UnionFind uf(nv);
  std::vector<char> used(static_cast<std::size_t>(nv), 0);
  for (const auto& t : triangles) {
    uf.unite(t[0], t[1]);
    uf.unite(t[1], t[2]);
    for (int i : t) used[static_cast<std::size_t>(i)] = 1;
  }
  for (int v = 0; v < nv; ++v)
    if (!used[static_cast<std::size_t>(v)])
      throw GeometryError("isolated vertex " + std::to_string(v));

  auto topo = std::make_shared<Topology>();
  topo->mode = Mode::Mesh3D;
  std::map<int, int> label;
  topo->component.resize(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) {
    const int r = uf.find(v);
    auto it = label.find(r);
    if (it == label.end()) it = label.emplace(r, static_cast<int>(label.size())).first;
    topo->component[static_cast<std::size_t>(v)] = it->second;
  }
  topo->component_count = static_cast<int>(label.size());

  // Orient each component to positive enclosed volume.
  std::vector<double> vol(static_cast<std::size_t>(topo->component_count), 0.0);
  for (const auto& t : triangles)
    vol[static_cast<std::size_t>(topo->component[static_cast<std::size_t>(t[0])])] +=
        vertices[static_cast<std::size_t>(t[0])].dot(
            vertices[static_cast<std::size_t>(t[1])].cross(vertices[static_cast<std::size_t>(t[2])])) /
        6.0;
  for (auto& t : triangles)
    if (vol[static_cast<std::size_t>(topo->component[static_cast<std::size_t>(t[0])])] < 0.0)
      std::swap(t[1], t[2]);

  topo->neighbors.resize(static_cast<std::size_t>(nv));
  topo->vertex_faces.resize(static_cast<std::size_t>(nv));
  for (std::size_t f = 0; f < triangles.size(); ++f) {
    const auto& t = triangles[f];
    for (int c = 0; c < 3; ++c) {
      const auto a = static_cast<std::size_t>(t[static_cast<std::size_t>(c)]);
      topo->vertex_faces[a].push_back(static_cast<int>(f));
      topo->neighbors[a].push_back(t[static_cast<std::size_t>((c + 1) % 3)]);
      topo->neighbors[a].push_back(t[static_cast<std::size_t>((c + 2) % 3)]);
    }
  }
  for (auto& nb : topo->neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  topo->triangles = std::move(triangles);
  const double eps = options.eps_rel * diag_of(vertices);
  DiscreteSurface s(std::move(topo), std::move(vertices), eps);
  if (auto bad = s.degenerate_vertices(); !bad.empty())
    throw GeometryError("degenerate mesh: element below size floor at vertices " +
                        vertex_list(bad));
  return s;
}

DiscreteSurface DiscreteSurface::with_positions(std::vector<Vec3> positions) const {
  if (positions.size() != positions_.size())
    throw GeometryError("position count does not match connectivity");
  DiscreteSurface s(topo_, std::move(positions), eps_geom_);
  if (auto bad = s.degenerate_vertices(); !bad.empty())
    throw GeometryError("degenerate geometry at vertices " + vertex_list(bad));
  return s;
}

std::vector<int> DiscreteSurface::ring(int v, int rings) const {
  std::vector<int> out{v};
  std::vector<int> frontier{v};
  for (int r = 0; r < rings; ++r) {
    std::vector<int> next_frontier;
    for (int u : frontier)
      for (int w : neighbors(u))
        if (std::find(out.begin(), out.end(), w) == out.end()) {
          out.push_back(w);
          next_frontier.push_back(w);
        }
    frontier = std::move(next_frontier);
  }
  return out;
}

double DiscreteSurface::bbox_diagonal() const { return diag_of(positions_); }

std::vector<std::vector<Vec2>> DiscreteSurface::curve_components() const {
  if (!is_curve()) throw GeometryError("curve_components on a mesh");
  std::vector<std::vector<Vec2>> out(static_cast<std::size_t>(component_count()));
  for (int v = 0; v < vertex_count(); ++v)
    out[static_cast<std::size_t>(component_of(v))].emplace_back(position(v).x(), position(v).y());
  return out;
}

std::vector<int> DiscreteSurface::degenerate_vertices() const {
  std::vector<int> bad;
  for (const auto& p : positions_)
    if (!p.allFinite()) {
      for (int v = 0; v < vertex_count(); ++v)
        if (!position(v).allFinite()) bad.push_back(v);
      return bad;
    }
  if (is_curve()) {
    for (int v = 0; v < vertex_count(); ++v)
      if ((position(next(v)) - position(v)).norm() <= eps_geom_) {
        bad.push_back(v);
        bad.push_back(next(v));
      }
  } else {
    const double area_floor = eps_geom_ * eps_geom_;
    for (const auto& t : triangles()) {
      const Vec3& a = position(t[0]);
      const Vec3& b = position(t[1]);
      const Vec3& c = position(t[2]);
      const bool small_edge =
          (b - a).norm() <= eps_geom_ || (c - b).norm() <= eps_geom_ || (a - c).norm() <= eps_geom_;
      if (small_edge || 0.5 * (b - a).cross(c - a).norm() <= area_floor)
        bad.insert(bad.end(), t.begin(), t.end());
    }
  }
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  return bad;
}

// ---------------------------------------------------------------------------
// Measures and first variations

SurfaceField vertex_measure(const DiscreteSurface& s) {
  SurfaceField m = SurfaceField::Zero(s.vertex_count());
  if (s.is_curve()) {
    for (int v = 0; v < s.vertex_count(); ++v) {
      const double len = (s.position(s.next(v)) - s.position(v)).norm();
      m(v) += 0.5 * len;
      m(s.next(v)) += 0.5 * len;
    }
  } else {
    // Mixed Voronoi areas: circumcentric split on acute triangles, half/quarter
    // split on obtuse ones.
    for (const auto& t : s.triangles()) {
      const Vec3 p[3] = {s.position(t[0]), s.position(t[1]), s.position(t[2])};
      const double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
      double cot[3];
      int obtuse = -1;
      for (int c = 0; c < 3; ++c) {
        const Vec3 a = p[(c + 1) % 3] - p[c];
        const Vec3 b = p[(c + 2) % 3] - p[c];
        cot[c] = a.dot(b) / a.cross(b).norm();
        if (a.dot(b) < 0.0) obtuse = c;
      }
      for (int c = 0; c < 3; ++c) {
        if (obtuse >= 0) {
          m(t[c]) += c == obtuse ? 0.5 * area : 0.25 * area;
          continue;
        }
        const double e1 = (p[(c + 1) % 3] - p[c]).squaredNorm();
        const double e2 = (p[(c + 2) % 3] - p[c]).squaredNorm();
        m(t[c]) += (e1 * cot[(c + 2) % 3] + e2 * cot[(c + 1) % 3]) / 8.0;
      }
    }
  }
  return m;
}

Measure measure(const DiscreteSurface& s) {
  Measure out;
  out.volume.assign(static_cast<std::size_t>(s.component_count()), 0.0);
  if (s.is_curve()) {
    for (int v = 0; v < s.vertex_count(); ++v) {
      const Vec3& p = s.position(v);
      const Vec3& q = s.position(s.next(v));
      out.perimeter += (q - p).norm();
      out.volume[static_cast<std::size_t>(s.component_of(v))] += 0.5 * cross2(p, q);
    }
  } else {
    for (const auto& t : s.triangles()) {
      const Vec3& a = s.position(t[0]);
      const Vec3& b = s.position(t[1]);
      const Vec3& c = s.position(t[2]);
      out.perimeter += 0.5 * (b - a).cross(c - a).norm();
      out.volume[static_cast<std::size_t>(s.component_of(t[0]))] += a.dot(b.cross(c)) / 6.0;
    }
  }
  return out;
}

std::vector<Vec3> area_normals(const DiscreteSurface& s) {
  std::vector<Vec3> n(static_cast<std::size_t>(s.vertex_count()), Vec3::Zero());
  if (s.is_curve()) {
    for (int v = 0; v < s.vertex_count(); ++v) {
      const Vec3 tp = (s.position(v) - s.position(s.prev(v))).normalized();
      const Vec3 tn = (s.position(s.next(v)) - s.position(v)).normalized();
      n[static_cast<std::size_t>(v)] = rot_cw(tp + tn).normalized();
    }
  } else {
    for (const auto& t : s.triangles()) {
      const Vec3 a = (s.position(t[1]) - s.position(t[0])).cross(s.position(t[2]) - s.position(t[0]));
      for (int i : t) n[static_cast<std::size_t>(i)] += a;
    }
    for (auto& x : n) x.normalize();
  }
  return n;
}

std::vector<Vec3> perimeter_gradient(const DiscreteSurface& s) {
  std::vector<Vec3> g(static_cast<std::size_t>(s.vertex_count()), Vec3::Zero());
  if (s.is_curve()) {
    for (int v = 0; v < s.vertex_count(); ++v) {
      const Vec3 tp = (s.position(v) - s.position(s.prev(v))).normalized();
      const Vec3 tn = (s.position(s.next(v)) - s.position(v)).normalized();
      g[static_cast<std::size_t>(v)] = tp - tn;
    }
  } else {
    for (const auto& t : s.triangles()) {
      const Vec3 nf = (s.position(t[1]) - s.position(t[0]))
                          .cross(s.position(t[2]) - s.position(t[0]))
                          .normalized();
      for (int c = 0; c < 3; ++c) {
        const int a = t[static_cast<std::size_t>(c)];
        const int b = t[static_cast<std::size_t>((c + 1) % 3)];
        const int d = t[static_cast<std::size_t>((c + 2) % 3)];
        g[static_cast<std::size_t>(a)] += 0.5 * nf.cross(s.position(d) - s.position(b));
      }
    }
  }
  return g;
}

std::vector<Vec3> volume_gradient(const DiscreteSurface& s) {
  std::vector<Vec3> g(static_cast<std::size_t>(s.vertex_count()), Vec3::Zero());
  if (s.is_curve()) {
    for (int v = 0; v < s.vertex_count(); ++v)
      g[static_cast<std::size_t>(v)] = 0.5 * rot_cw(s.position(s.next(v)) - s.position(s.prev(v)));
  } else {
    for (const auto& t : s.triangles()) {
      const Vec3 a = 0.5 * (s.position(t[1]) - s.position(t[0])).cross(s.position(t[2]) - s.position(t[0]));
      for (int i : t) g[static_cast<std::size_t>(i)] += a / 3.0;
    }
  }
  return g;
}

std::vector<std::array<double, 3>> offset_volume_weights(const DiscreteSurface& s,
                                                         const std::vector<Vec3>& normals) {
  const auto nv = static_cast<std::size_t>(s.vertex_count());
  std::vector<std::array<double, 3>> w(nv, {0.0, 0.0, 0.0});
  if (s.is_curve()) {
    for (int v = 0; v < s.vertex_count(); ++v) {
      const auto i = static_cast<std::size_t>(v);
      const auto p = static_cast<std::size_t>(s.prev(v)), q = static_cast<std::size_t>(s.next(v));
      w[i][0] = 0.5 * normals[i].dot(rot_cw(s.position(s.next(v)) - s.position(s.prev(v))));
      w[i][1] = 0.5 * normals[i].dot(rot_cw(normals[q] - normals[p]));
    }
    return w;
  }
  std::vector<std::array<Vec3, 3>> acc(nv, {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
  for (const auto& t : s.triangles()) {
    const auto a = static_cast<std::size_t>(t[0]), b = static_cast<std::size_t>(t[1]),
               c = static_cast<std::size_t>(t[2]);
    const Vec3 e1 = s.position(t[1]) - s.position(t[0]), e2 = s.position(t[2]) - s.position(t[0]);
    const Vec3 d1 = normals[b] - normals[a], d2 = normals[c] - normals[a];
    const Vec3 c0 = 0.5 * e1.cross(e2);
    const Vec3 c1 = 0.5 * (e1.cross(d2) + d1.cross(e2));
    const Vec3 c2 = 0.5 * d1.cross(d2);
    for (std::size_t i : {a, b, c}) {
      acc[i][0] += c0 / 3.0;
      acc[i][1] += c1 / 3.0;
      acc[i][2] += c2 / 3.0;
    }
  }
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t k = 0; k < 3; ++k) w[i][k] = normals[i].dot(acc[i][k]);
  return w;
}

// ---------------------------------------------------------------------------
// Curvature

CurvatureData compute_curvature(const DiscreteSurface& s) {
  const int nv = s.vertex_count();
  CurvatureData c;
  c.vertex_measure = vertex_measure(s);
  c.H.resize(nv);
  c.K = SurfaceField::Zero(nv);
  c.k1.resize(nv);
  c.k2.resize(nv);
  c.H_area.resize(nv);
  c.normal.resize(static_cast<std::size_t>(nv));
  c.dir1.resize(static_cast<std::size_t>(nv));
  c.dir2.assign(static_cast<std::size_t>(nv), Vec3::Zero());
  c.B.resize(static_cast<std::size_t>(nv));

  if (s.is_curve()) {
    c.kappa.resize(nv);
    for (int v = 0; v < nv; ++v) {
      const auto i = static_cast<std::size_t>(v);
      const Vec3 tp = (s.position(v) - s.position(s.prev(v))).normalized();
      const Vec3 tn = (s.position(s.next(v)) - s.position(v)).normalized();
      const Vec3 t = (tp + tn).normalized();
      if (!t.allFinite()) throw GeometryError("degenerate stencil: cusp at vertex " + std::to_string(v));
      const double phi = std::atan2(cross2(tp, tn), tp.dot(tn));
      const double k = 2.0 * std::sin(0.5 * phi) / c.vertex_measure(v);
      c.normal[i] = rot_cw(t);
      c.kappa(v) = c.H(v) = c.k1(v) = c.H_area(v) = k;
      c.k2(v) = 0.0;
      c.dir1[i] = t;
      c.B[i] = k * t * t.transpose();
    }
    return c;
  }

  const auto fits = kernels::parallel::fit_quadrics(s, area_normals(s));
  for (int v = 0; v < nv; ++v) {
    const auto i = static_cast<std::size_t>(v);
    const auto& f = fits[i];
    if (!f.ok) throw GeometryError("degenerate stencil: quadric fit failed at vertex " + std::to_string(v));
    c.normal[i] = f.normal;
    c.k1(v) = f.k1;
    c.k2(v) = f.k2;
    c.H(v) = f.k1 + f.k2;
    c.K(v) = f.k1 * f.k2;
    c.dir1[i] = f.dir1;
    c.dir2[i] = f.dir2;
    c.B[i] = f.k1 * f.dir1 * f.dir1.transpose() + f.k2 * f.dir2 * f.dir2.transpose();
  }
  c.H_area = mean_curvature_normal(s);
  return c;
}

SurfaceField mean_curvature_normal(const DiscreteSurface& s) {
  const SurfaceField m = vertex_measure(s);
  const auto g = perimeter_gradient(s);
  const auto n = area_normals(s);
  SurfaceField H(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v)
    H(v) = g[static_cast<std::size_t>(v)].dot(n[static_cast<std::size_t>(v)]) / m(v);
  return H;
}

// ---------------------------------------------------------------------------
// Uniform ball condition

UbcEstimate estimate_ubc(const DiscreteSurface& s, const CurvatureData& c) {
  UbcEstimate out;
  double kmax = 0.0;
  for (int v = 0; v < s.vertex_count(); ++v)
    kmax = std::max({kmax, std::abs(c.k1(v)), std::abs(c.k2(v))});
  out.curvature_radius = kmax > 0.0 ? 1.0 / kmax : std::numeric_limits<double>::infinity();
  const double search = std::min(2.0 * out.curvature_radius, 2.0 * s.bbox_diagonal());
  const auto radii = kernels::parallel::tangent_ball_radii(s, c.normal, search);
  out.proximity_radius = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < radii.size(); ++v)
    if (radii[v] < out.proximity_radius) {
      out.proximity_radius = radii[v];
      out.limiting_vertex = static_cast<int>(v);
    }
  out.radius = std::min(out.curvature_radius, out.proximity_radius);
  return out;
}

double estimate_ubc_radius(const DiscreteSurface& s, const CurvatureData& c) {
  return estimate_ubc(s, c).radius;
}

OffsetResult offset_points(const DiscreteSurface& s, const CurvatureData& c, double tau) {
  OffsetResult out;
  out.points.resize(static_cast<std::size_t>(s.vertex_count()));
  for (int v = 0; v < s.vertex_count(); ++v)
    out.points[static_cast<std::size_t>(v)] = s.position(v) + tau * c.normal[static_cast<std::size_t>(v)];
  if (tau != 0.0) out.within_ubc = std::abs(tau) < estimate_ubc_radius(s, c);
  return out;
}

}  // namespace flatflow
