#pragma once

#include <limits>
#include <string>
#include <vector>

#include "flatflow/geometry.hpp"
#include "flatflow/laplace_beltrami.hpp"
#include "flatflow/normal_graph.hpp"

namespace flatflow {

enum class Fallback { None, GradientDescent };

struct StepConfig {
  double h = 1e-4;
  /// Constraint radius; the effective value is min(delta, UBC estimate / 8).
  double delta = std::numeric_limits<double>::infinity();
  int max_picard = 50;
  double picard_tol = 1e-10;
  Fallback fallback = Fallback::GradientDescent;
};

struct StepResult {
  HeightField psi;
  SurfaceField xi;
  double distance = 0.0;
  std::vector<double> multiplier_per_component;
  /// Standard deviation of H_graph + f/h over each component.
  std::vector<double> multiplier_spread;
  double el_residual = 0.0;
  double constraint_margin = 0.0;
  bool converged = false;
  int picard_iters = 0;
  bool used_fallback = false;
  double delta = 0.0;  ///< effective constraint radius
  double ubc_radius = 0.0;
  /// Euler-Lagrange residual of every Picard iterate, starting at psi = 0.
  std::vector<double> residual_history;
  /// "ok", "picard", "constraint", "fold" or "fallback".
  std::string status;
};

struct StepEnergy {
  double perimeter_term = 0.0;
  double dissipation_term = 0.0;
  double total = 0.0;
};

/// One minimizing-movements step from `reference`: Picard iteration on
///   (M/h + K M^-1 K) psi' = -K (H_graph(psi) - M^-1 K psi) - (1/h) M q(psi),
/// q = xi(psi) - psi, from psi = 0, followed by a per-component constant
/// shift that zeroes the weighted mean of xi. The constraint |psi| <= delta
/// is checked afterwards, never imposed.
StepResult step(const DiscreteSurface& reference, const CurvatureData& curvature,
                const Hm1Solver& solver, const StepConfig& cfg);

/// Perimeter of the graph plus hm1_norm(xi)^2 / (2h). Throws
/// CompatibilityError if xi does not preserve the volume of every component.
StepEnergy energy(const DiscreteSurface& reference, const CurvatureData& curvature,
                  const Hm1Solver& solver, const HeightField& psi, double h);

/// Mass-weighted L2 norm of (1/h) xi(psi) - Laplacian(H_graph(psi)).
double el_residual(const DiscreteSurface& reference, const CurvatureData& curvature,
                   const Hm1Solver& solver, const HeightField& psi, double h);

/// Adds to psi the per-component constant that zeroes the weighted mean of
/// xi (scalar Newton).
HeightField project_volume(const CurvatureData& curvature, const Hm1Solver& solver, HeightField psi);

double effective_delta(double delta, double ubc_radius);

}  // namespace flatflow
