#include "flatflow/normal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace flatflow {

namespace {

std::string list_vertices(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size() && i < 8; ++i) os << (i ? ", " : "") << v[i];
  if (v.size() > 8) os << ", ...";
  return os.str();
}

void require_length(const DiscreteSurface& s, const SurfaceField& f) {
  if (f.size() != s.vertex_count()) throw Error("field length does not match the surface");
}

// Bounding-volume hierarchy over segments (2D) or triangles (3D), used for
// normal-ray queries.
class RayTree {
 public:
  RayTree(const DiscreteSurface& s) : s_(s) {
    const std::size_t count = s.is_curve() ? static_cast<std::size_t>(s.vertex_count())
                                           : s.triangles().size();
    order_.resize(count);
    std::iota(order_.begin(), order_.end(), 0);
    lo_.resize(count);
    hi_.resize(count);
    centroid_.resize(count);
    for (std::size_t p = 0; p < count; ++p) {
      const auto pts = corners(static_cast<int>(p));
      Vec3 lo = pts[0], hi = pts[0], sum = Vec3::Zero();
      for (const auto& x : pts) {
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
        sum += x;
      }
      lo_[p] = lo;
      hi_[p] = hi;
      centroid_[p] = sum / static_cast<double>(pts.size());
    }
    build(0, count);
  }

  /// Parameters t in [-w, w] where origin + t dir meets a primitive.
  std::vector<double> hits(const Vec3& origin, const Vec3& dir, double w, double tol) const {
    std::vector<double> out;
    if (!nodes_.empty()) visit(0, origin, dir, w, tol, out);
    return out;
  }

 private:
  struct Node {
    Vec3 lo, hi;
    std::size_t begin, end;
    int left = -1, right = -1;
  };

  std::vector<Vec3> corners(int p) const {
    if (s_.is_curve()) return {s_.position(p), s_.position(s_.next(p))};
    const Triangle& t = s_.triangles()[static_cast<std::size_t>(p)];
    return {s_.position(t[0]), s_.position(t[1]), s_.position(t[2])};
  }

  int build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    for (std::size_t i = begin; i < end; ++i) {
      node.lo = node.lo.cwiseMin(lo_[order_[i]]);
      node.hi = node.hi.cwiseMax(hi_[order_[i]]);
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin > 4) {
      int axis;
      (node.hi - node.lo).maxCoeff(&axis);
      const std::size_t mid = (begin + end) / 2;
      std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                       order_.begin() + static_cast<std::ptrdiff_t>(mid),
                       order_.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](std::size_t a, std::size_t b) { return centroid_[a][axis] < centroid_[b][axis]; });
      const int l = build(begin, mid);
      const int r = build(mid, end);
      nodes_[static_cast<std::size_t>(id)].left = l;
      nodes_[static_cast<std::size_t>(id)].right = r;
    }
    return id;
  }

  static bool box_hit(const Node& n, const Vec3& o, const Vec3& d, double w, double tol) {
    double t0 = -w, t1 = w;
    for (int k = 0; k < 3; ++k) {
      const double lo = n.lo[k] - tol, hi = n.hi[k] + tol;
      if (std::abs(d[k]) < 1e-300) {
        if (o[k] < lo || o[k] > hi) return false;
        continue;
      }
      double a = (lo - o[k]) / d[k], b = (hi - o[k]) / d[k];
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
      if (t0 > t1) return false;
    }
    return true;
  }

  void visit(int id, const Vec3& o, const Vec3& d, double w, double tol,
             std::vector<double>& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!box_hit(n, o, d, w, tol)) return;
    if (n.left >= 0) {
      visit(n.left, o, d, w, tol, out);
      visit(n.right, o, d, w, tol, out);
      return;
    }
    for (std::size_t i = n.begin; i < n.end; ++i) {
      const auto pts = corners(static_cast<int>(order_[i]));
      double t;
      if (pts.size() == 2 ? intersect_segment(o, d, pts[0], pts[1], tol, t)
                          : intersect_triangle(o, d, pts[0], pts[1], pts[2], tol, t))
        if (std::abs(t) <= w) out.push_back(t);
    }
  }

  static bool intersect_segment(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                                double tol, double& t) {
    const Vec3 e = b - a;
    const double den = d.x() * (-e.y()) - d.y() * (-e.x());
    if (std::abs(den) < 1e-300) return false;
    const Vec3 r = a - o;
    t = (r.x() * (-e.y()) - r.y() * (-e.x())) / den;
    const double u = (d.x() * r.y() - d.y() * r.x()) / den;
    const double slack = tol / std::max(e.norm(), 1e-300);
    return u >= -slack && u <= 1.0 + slack;
  }

  static bool intersect_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                                 const Vec3& c, double tol, double& t) {
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 p = d.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-300) return false;
    const Vec3 r = o - a;
    const double u = r.dot(p) / det;
    const Vec3 q = r.cross(e1);
    const double v = d.dot(q) / det;
    t = e2.dot(q) / det;
    const double slack = tol / std::max(std::min(e1.norm(), e2.norm()), 1e-300);
    return u >= -slack && v >= -slack && u + v <= 1.0 + slack;
  }

  const DiscreteSurface& s_;
  std::vector<std::size_t> order_;
  std::vector<Vec3> lo_, hi_, centroid_;
  std::vector<Node> nodes_;
};

}  // namespace

SurfaceField xi_from_height(const CurvatureData& c, const HeightField& psi, double bound) {
  if (psi.size() != c.H.size()) throw Error("field length does not match the surface");
  if (psi.size() > 0 && psi.cwiseAbs().maxCoeff() >= bound)
    throw GraphError("height exceeds the uniform-ball bound");
  const auto p = psi.array();
  return (p + 0.5 * c.H.array() * p.square() + c.K.array() * p.cube() / 3.0).matrix();
}

SurfaceField xi_derivative(const CurvatureData& c, const HeightField& psi) {
  const auto p = psi.array();
  return (1.0 + c.H.array() * p + c.K.array() * p.square()).matrix();
}

DiscreteSurface graph_surface(const DiscreteSurface& ref, const CurvatureData& c,
                              const HeightField& psi) {
  require_length(ref, psi);
  std::vector<Vec3> pos(ref.positions());
  for (int v = 0; v < ref.vertex_count(); ++v)
    pos[static_cast<std::size_t>(v)] += psi(v) * c.normal[static_cast<std::size_t>(v)];

  std::vector<int> bad;
  const double eps = ref.eps_geom();
  if (ref.is_curve()) {
    for (int v = 0; v < ref.vertex_count(); ++v) {
      const int w = ref.next(v);
      const Vec3 e0 = ref.position(w) - ref.position(v);
      const Vec3 e1 = pos[static_cast<std::size_t>(w)] - pos[static_cast<std::size_t>(v)];
      if (e0.dot(e1) <= 0.0 || e1.norm() <= eps) {
        bad.push_back(v);
        bad.push_back(w);
      }
    }
  } else {
    for (const auto& t : ref.triangles()) {
      const Vec3 n0 = (ref.position(t[1]) - ref.position(t[0])).cross(ref.position(t[2]) - ref.position(t[0]));
      const Vec3 n1 = (pos[static_cast<std::size_t>(t[1])] - pos[static_cast<std::size_t>(t[0])])
                          .cross(pos[static_cast<std::size_t>(t[2])] - pos[static_cast<std::size_t>(t[0])]);
      if (n0.dot(n1) <= 0.0 || 0.5 * n1.norm() <= eps * eps) bad.insert(bad.end(), t.begin(), t.end());
    }
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    throw GraphError("graph surface folds over at vertices " + list_vertices(bad), bad);
  }
  return ref.with_positions(std::move(pos));
}

std::vector<Vec3> tangential_gradient(const DiscreteSurface& s, const SurfaceField& f) {
  require_length(s, f);
  const auto nv = static_cast<std::size_t>(s.vertex_count());
  std::vector<Vec3> g(nv, Vec3::Zero());
  std::vector<double> w(nv, 0.0);
  if (s.is_curve()) {
    for (int v = 0; v < s.vertex_count(); ++v) {
      const int u = s.next(v);
      const Vec3 e = s.position(u) - s.position(v);
      const double len = e.norm();
      const Vec3 cell = (f(u) - f(v)) / (len * len) * e;
      for (int i : {u, v}) {
        g[static_cast<std::size_t>(i)] += len * cell;
        w[static_cast<std::size_t>(i)] += len;
      }
    }
  } else {
    for (const auto& t : s.triangles()) {
      const Vec3 n = (s.position(t[1]) - s.position(t[0])).cross(s.position(t[2]) - s.position(t[0]));
      const double area2 = n.norm();
      const Vec3 nh = n / area2;
      Vec3 cell = Vec3::Zero();
      for (int c = 0; c < 3; ++c) {
        const Vec3 e = s.position(t[static_cast<std::size_t>((c + 2) % 3)]) -
                       s.position(t[static_cast<std::size_t>((c + 1) % 3)]);
        cell += f(t[static_cast<std::size_t>(c)]) * nh.cross(e) / area2;
      }
      for (int i : t) {
        g[static_cast<std::size_t>(i)] += 0.5 * area2 * cell;
        w[static_cast<std::size_t>(i)] += 0.5 * area2;
      }
    }
  }
  for (std::size_t i = 0; i < nv; ++i) g[i] /= w[i];
  return g;
}

SurfaceField graph_jacobian(const DiscreteSurface& ref, const CurvatureData& c, const HeightField& psi) {
  require_length(ref, psi);
  const auto grad = tangential_gradient(ref, psi);
  SurfaceField J(ref.vertex_count());
  for (int v = 0; v < ref.vertex_count(); ++v) {
    const auto i = static_cast<std::size_t>(v);
    const double a1 = 1.0 + psi(v) * c.k1(v);
    if (ref.is_curve()) {
      const double d = grad[i].dot(c.dir1[i]);
      J(v) = std::sqrt(a1 * a1 + d * d);
    } else {
      const double a2 = 1.0 + psi(v) * c.k2(v);
      const double d1 = grad[i].dot(c.dir1[i]);
      const double d2 = grad[i].dot(c.dir2[i]);
      J(v) = std::sqrt(a1 * a1 * a2 * a2 + a1 * a1 * d2 * d2 + a2 * a2 * d1 * d1);
    }
    if (a1 <= 0.0 || (!ref.is_curve() && 1.0 + psi(v) * c.k2(v) <= 0.0))
      throw GraphError("non-positive Jacobian at vertex " + std::to_string(v), {v});
  }
  return J;
}

GraphGeometry mean_curvature_of_graph(const DiscreteSurface& ref, const CurvatureData& c,
                                      const Hm1Solver& solver, const HeightField& psi) {
  GraphGeometry g;
  g.xi = xi_from_height(c, psi);
  g.jacobian = graph_jacobian(ref, c, psi);
  g.H_graph = mean_curvature_normal(graph_surface(ref, c, psi));
  g.H_linear = c.H_area - solver.apply_laplacian(psi);
  g.R0 = g.H_graph - g.H_linear;
  return g;
}

HeightField height_between(const DiscreteSurface& ref, const CurvatureData& c,
                           const DiscreteSurface& target, double window) {
  if (ref.mode() != target.mode()) throw GraphError("reference and target have different modes");
  if (window <= 0.0) window = estimate_ubc_radius(ref, c);
  const double tol = 1e-10 * std::max(ref.bbox_diagonal(), target.bbox_diagonal());
  const RayTree tree(target);
  HeightField psi(ref.vertex_count());
  std::vector<int> missed, multiple;
  for (int v = 0; v < ref.vertex_count(); ++v) {
    auto t = tree.hits(ref.position(v), c.normal[static_cast<std::size_t>(v)], window, tol);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [&](double a, double b) { return b - a <= tol; }), t.end());
    if (t.empty()) {
      missed.push_back(v);
      continue;
    }
    if (t.size() > 1) multiple.push_back(v);
    psi(v) = t.front();
  }
  if (!missed.empty())
    throw GraphError("normal rays miss the target at vertices " + list_vertices(missed), missed);
  if (!multiple.empty())
    throw GraphError("target is not a normal graph: multiple crossings at vertices " +
                         list_vertices(multiple),
                     multiple);
  return psi;
}

SurfaceField column_volumes(const DiscreteSurface& ref, const CurvatureData& c, const HeightField& psi) {
  require_length(ref, psi);
  const auto w = offset_volume_weights(ref, c.normal);
  SurfaceField out(ref.vertex_count());
  for (int v = 0; v < ref.vertex_count(); ++v) {
    const auto& a = w[static_cast<std::size_t>(v)];
    const double t = psi(v);
    out(v) = t * (a[0] + t * (a[1] / 2.0 + t * a[2] / 3.0));
  }
  return out;
}

std::vector<double> xi_volume(const DiscreteSurface& ref, const CurvatureData& c, const HeightField& psi) {
  const SurfaceField col = column_volumes(ref, c, psi);
  std::vector<double> out(static_cast<std::size_t>(ref.component_count()), 0.0);
  for (int v = 0; v < ref.vertex_count(); ++v) out[static_cast<std::size_t>(ref.component_of(v))] += col(v);
  return out;
}

}  // namespace flatflow
