#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "flatflow/geometry.hpp"

namespace flatflow {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Hm1Options {
  /// Admissible per-component weighted mean of a right-hand side, relative
  /// to its root-mean-square value.
  double compatibility_tol = 1e-8;
  /// Relative residual of the bordered solve, after iterative refinement.
  double residual_tol = 1e-10;
};

struct NormSuite {
  double l2 = 0.0;
  double h1_semi = 0.0;
  std::optional<double> hm1;  ///< only for per-component zero-mean fields
};

/// Discrete Laplace-Beltrami machinery on a closed surface: P1 stiffness K
/// (second differences on curves, cotangent weights on meshes) and lumped
/// mass M. Pointwise Laplacian is -M^{-1} K. Poisson solves pin the weighted
/// mean of every component with one bordering constraint each.
///
/// Immutable after assembly; solves are const and may run concurrently.
class Hm1Solver {
 public:
  static Hm1Solver assemble(const DiscreteSurface& surface, Hm1Options options = {});

  const SparseMatrix& stiffness() const { return stiffness_; }
  const SurfaceField& mass() const { return mass_; }
  const std::vector<int>& component_index() const { return component_; }
  int component_count() const { return component_count_; }
  int size() const { return static_cast<int>(mass_.size()); }
  const Hm1Options& options() const { return options_; }

  /// Total measure per component.
  const std::vector<double>& component_measure() const { return component_measure_; }

  /// Mass-weighted mean of f over every component.
  std::vector<double> component_means(const SurfaceField& f) const;
  /// f minus its weighted mean on each component.
  SurfaceField remove_means(const SurfaceField& f) const;
  /// Throws CompatibilityError unless every weighted mean is below tolerance.
  void check_compatible(const SurfaceField& xi) const;
  bool is_compatible(const SurfaceField& xi) const;

  /// a^T M b.
  double inner(const SurfaceField& a, const SurfaceField& b) const;

  /// -M^{-1} K f.
  SurfaceField apply_laplacian(const SurfaceField& f) const;

  /// f with K f = M xi and zero weighted mean per component.
  SurfaceField solve_poisson(const SurfaceField& xi) const;

  /// sqrt(xi^T M f), f = solve_poisson(xi).
  double hm1_norm(const SurfaceField& xi) const;

  NormSuite norm_suite(const SurfaceField& f) const;

 private:
  SurfaceField solve_bordered(const SurfaceField& rhs) const;

  struct Factor;
  SparseMatrix stiffness_;
  SurfaceField mass_;
  std::vector<int> component_;
  int component_count_ = 0;
  std::vector<double> component_measure_;
  Hm1Options options_;
  std::shared_ptr<const Factor> factor_;
};

/// Free-function forms.
inline Hm1Solver assemble(const DiscreteSurface& s, Hm1Options o = {}) {
  return Hm1Solver::assemble(s, o);
}

}  // namespace flatflow
