#pragma once

#include <limits>
#include <vector>

#include "flatflow/geometry.hpp"
#include "flatflow/laplace_beltrami.hpp"

namespace flatflow {

/// Normal displacement field over a reference surface.
using HeightField = SurfaceField;

struct GraphGeometry {
  SurfaceField xi;        ///< signed normal-column volume density
  SurfaceField jacobian;  ///< tangential Jacobian of x -> x + psi n
  SurfaceField H_graph;   ///< mean curvature of the graph at the image vertices
  SurfaceField H_linear;  ///< -Laplacian(psi) + H of the reference
  SurfaceField R0;        ///< H_graph - H_linear
};

/// psi + (H/2) psi^2 + (K/3) psi^3 (K = 0 on curves). Throws GraphError if
/// max |psi| reaches `bound`.
SurfaceField xi_from_height(const CurvatureData& curvature, const HeightField& psi,
                            double bound = std::numeric_limits<double>::infinity());

/// d xi / d psi = 1 + H psi + K psi^2.
SurfaceField xi_derivative(const CurvatureData& curvature, const HeightField& psi);

/// Vertex i moves to x_i + psi_i n_i. Throws GraphError listing the vertices
/// of every cell that flips orientation or falls below the degeneracy floor.
DiscreteSurface graph_surface(const DiscreteSurface& reference, const CurvatureData& curvature,
                              const HeightField& psi);

/// Vertex gradients of a field: per-cell linear-element gradients averaged
/// with area (3D) or length (2D) weights.
std::vector<Vec3> tangential_gradient(const DiscreteSurface& surface, const SurfaceField& f);

/// Curves: sqrt((1 + kappa psi)^2 + psi'^2). Surfaces: the principal-frame
/// formula with the gradient projected onto the fitted principal directions.
/// Throws GraphError if J <= 0 anywhere.
SurfaceField graph_jacobian(const DiscreteSurface& reference, const CurvatureData& curvature,
                            const HeightField& psi);

GraphGeometry mean_curvature_of_graph(const DiscreteSurface& reference,
                                      const CurvatureData& curvature, const Hm1Solver& solver,
                                      const HeightField& psi);

/// Signed distance along the normal ray of every reference vertex to the
/// target, searched within +-window (default: the UBC estimate of the
/// reference). Throws GraphError when a ray misses or crosses the target
/// more than once inside the window.
HeightField height_between(const DiscreteSurface& reference, const CurvatureData& curvature,
                           const DiscreteSurface& target, double window = -1.0);

/// Per-vertex column volumes: the integral from 0 to psi_i of the exact
/// offset-volume weight of vertex i. Their sum over a component equals the
/// volume between the reference and its graph exactly when psi is constant
/// on the component.
SurfaceField column_volumes(const DiscreteSurface& reference, const CurvatureData& curvature,
                            const HeightField& psi);

/// Sum of column_volumes per component.
std::vector<double> xi_volume(const DiscreteSurface& reference, const CurvatureData& curvature,
                              const HeightField& psi);

}  // namespace flatflow
