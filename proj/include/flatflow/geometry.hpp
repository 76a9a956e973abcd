#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "flatflow/error.hpp"

namespace flatflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Triangle = std::array<int, 3>;

/// One scalar per vertex. Units depend on context (length for heights,
/// 1/length for curvatures).
using SurfaceField = Eigen::VectorXd;

enum class Mode { Curve2D, Mesh3D };

struct GeometryOptions {
  /// Degeneracy floor relative to the bounding-box diagonal.
  double eps_rel = 1e-9;
};

/// A closed, embedded, outward-oriented hypersurface: a union of closed
/// polygons in the plane or a closed triangle mesh in space.
///
/// Positions are always stored as 3-vectors; curves live in the z = 0 plane.
/// Curve vertices are stored component by component, each component a cycle
/// in counter-clockwise order, so that rotating the tangent clockwise gives
/// the outward normal. Construction validates closedness and the degeneracy
/// floor and orients every component to positive enclosed volume.
class DiscreteSurface {
 public:
  static DiscreteSurface from_curves(const std::vector<std::vector<Vec2>>& components,
                                     GeometryOptions options = {});
  static DiscreteSurface from_mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                                   GeometryOptions options = {});

  /// Same connectivity, new vertex positions. Checks the degeneracy floor
  /// but does not re-orient.
  DiscreteSurface with_positions(std::vector<Vec3> positions) const;

  Mode mode() const { return topo_->mode; }
  bool is_curve() const { return topo_->mode == Mode::Curve2D; }
  int vertex_count() const { return static_cast<int>(positions_.size()); }
  int component_count() const { return topo_->component_count; }

  const std::vector<Vec3>& positions() const { return positions_; }
  const Vec3& position(int v) const { return positions_[static_cast<std::size_t>(v)]; }

  /// Oriented triangles (empty for curves).
  const std::vector<Triangle>& triangles() const { return topo_->triangles; }
  /// Curve successor / predecessor along the cycle.
  int next(int v) const { return topo_->next[static_cast<std::size_t>(v)]; }
  int prev(int v) const { return topo_->prev[static_cast<std::size_t>(v)]; }

  const std::vector<int>& component_ids() const { return topo_->component; }
  int component_of(int v) const { return topo_->component[static_cast<std::size_t>(v)]; }
  /// Sorted one-ring neighbours ({prev, next} for curves).
  const std::vector<int>& neighbors(int v) const {
    return topo_->neighbors[static_cast<std::size_t>(v)];
  }
  /// Incident triangle indices (3D only).
  const std::vector<int>& vertex_faces(int v) const {
    return topo_->vertex_faces[static_cast<std::size_t>(v)];
  }

  /// Vertices whose graph distance from v is at most `rings` (v included).
  std::vector<int> ring(int v, int rings) const;

  /// +1: normals point out of the enclosed region.
  int orientation() const { return 1; }
  double eps_geom() const { return eps_geom_; }
  double bbox_diagonal() const;

  /// Curve components as ordered point lists (Curve2D only).
  std::vector<std::vector<Vec2>> curve_components() const;

  /// Vertices adjacent to an edge or triangle below the degeneracy floor.
  std::vector<int> degenerate_vertices() const;

 private:
  struct Topology {
    Mode mode = Mode::Curve2D;
    std::vector<Triangle> triangles;
    std::vector<int> next, prev;
    std::vector<int> component;
    int component_count = 0;
    std::vector<std::vector<int>> neighbors;
    std::vector<std::vector<int>> vertex_faces;
  };

  DiscreteSurface(std::shared_ptr<const Topology> topo, std::vector<Vec3> positions, double eps)
      : topo_(std::move(topo)), positions_(std::move(positions)), eps_geom_(eps) {}

  std::shared_ptr<const Topology> topo_;
  std::vector<Vec3> positions_;
  double eps_geom_ = 0.0;
};

/// Pointwise curvature quantities at the vertices.
///
/// Curves: H = kappa, K = 0, principal = (kappa, 0); B is the rank-one
/// tensor kappa t t^T. Surfaces: H = k1 + k2, K = k1 k2 from a quadric fit.
/// H_area is the first variation of the discrete perimeter along the
/// area-weighted vertex normal divided by the lumped vertex measure; it is
/// the mean curvature whose Laplacian drives the discrete flow. On curves it
/// coincides with kappa.
struct CurvatureData {
  std::vector<Vec3> normal;
  SurfaceField H;
  SurfaceField K;
  SurfaceField kappa;  ///< curves only, empty for meshes
  SurfaceField k1, k2;
  std::vector<Vec3> dir1, dir2;  ///< principal directions (dir2 = 0 for curves)
  std::vector<Mat3> B;           ///< second fundamental form as a 3x3 tensor
  SurfaceField H_area;
  SurfaceField vertex_measure;   ///< lumped length (2D) / mixed Voronoi area (3D)
};

CurvatureData compute_curvature(const DiscreteSurface& surface);

struct Measure {
  double perimeter = 0.0;
  std::vector<double> volume;  ///< enclosed volume per component
};

Measure measure(const DiscreteSurface& surface);

/// Lumped vertex measure: half the adjacent edge lengths (2D) or the mixed
/// Voronoi area (3D). Sums to the total perimeter in both cases.
SurfaceField vertex_measure(const DiscreteSurface& surface);

/// perimeter_gradient . area normal / vertex_measure, per vertex.
SurfaceField mean_curvature_normal(const DiscreteSurface& surface);

/// Area-weighted (3D) / edge-bisector (2D) vertex normals.
std::vector<Vec3> area_normals(const DiscreteSurface& surface);

/// Gradient of the discrete perimeter with respect to every vertex position.
std::vector<Vec3> perimeter_gradient(const DiscreteSurface& surface);

/// Gradient of the enclosed volume of the vertex's component.
std::vector<Vec3> volume_gradient(const DiscreteSurface& surface);

struct UbcEstimate {
  double radius = 0.0;            ///< min of the two terms below
  double curvature_radius = 0.0;  ///< 1 / max |principal curvature|
  double proximity_radius = 0.0;  ///< min tangent-ball radius over distant pairs
  int limiting_vertex = -1;
};

/// Conservative numerical proxy for the uniform-ball radius. The proximity
/// term is the smallest radius of a ball tangent at some vertex p that
/// reaches another vertex q more than three rings away:
/// |q - p|^2 / (2 |(q - p) . n_p|). For two facing sheets at gap g this is
/// g / 2. A lower-bound heuristic, not a certified bound: contacts between
/// unresolved samples are missed.
UbcEstimate estimate_ubc(const DiscreteSurface& surface, const CurvatureData& curvature);
double estimate_ubc_radius(const DiscreteSurface& surface, const CurvatureData& curvature);

struct OffsetResult {
  std::vector<Vec3> points;
  bool within_ubc = true;  ///< false: |tau| exceeded the UBC estimate
};

/// x + tau * n(x) at every vertex.
OffsetResult offset_points(const DiscreteSurface& surface, const CurvatureData& curvature,
                           double tau);

/// Per-vertex coefficients (w0, w1, w2) of the polynomial
/// w(tau) = n . dV/dx evaluated on the surface offset by tau along the
/// vertex normals. Integrating w from 0 to t and summing over a component
/// gives the exact volume between the surface and its constant-t offset.
std::vector<std::array<double, 3>> offset_volume_weights(const DiscreteSurface& surface,
                                                         const std::vector<Vec3>& normals);

// ---------------------------------------------------------------------------
// Shapes and file formats

enum class ShapeKind { Circle, Ellipse, PerturbedCircle, Sphere, PerturbedSphere, File };

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Circle;
  double R = 1.0;
  double a = 1.0, b = 1.0;     ///< ellipse semi-axes
  int n = 256;                 ///< curve vertex count
  int subdiv = 3;              ///< icosphere level
  int mode = 2;                ///< Fourier mode k / spherical-harmonic degree l
  int order = 0;               ///< spherical-harmonic order m
  double amplitude = 0.0;
  Vec3 center = Vec3::Zero();
  std::string path;            ///< for ShapeKind::File
};

DiscreteSurface build_shape(const ShapeSpec& spec, GeometryOptions options = {});

/// Closed curve sampled uniformly in arc length. `param` maps t in [0, 2pi)
/// to a point; it must trace the curve once counter-clockwise.
DiscreteSurface sample_closed_curve(const std::function<Vec2(double)>& param, int n,
                                    GeometryOptions options = {});

DiscreteSurface icosphere(double R, int subdiv, const Vec3& center = Vec3::Zero());

/// Real spherical harmonic P_l^m(cos theta) cos(m phi) scaled to unit max.
double spherical_harmonic(int l, int m, const Vec3& direction);

DiscreteSurface load_surface(const std::string& path, GeometryOptions options = {});
DiscreteSurface load_off(const std::string& path, GeometryOptions options = {});
DiscreteSurface load_obj(const std::string& path, GeometryOptions options = {});
DiscreteSurface load_curve_json(const std::string& path, GeometryOptions options = {});
DiscreteSurface parse_curve_json(const std::string& text, GeometryOptions options = {});
std::string curve_json(const DiscreteSurface& surface);
std::string off_text(const DiscreteSurface& surface);
void save_off(const DiscreteSurface& surface, const std::string& path);
void save_curve_json(const DiscreteSurface& surface, const std::string& path);

}  // namespace flatflow
