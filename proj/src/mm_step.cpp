#include "flatflow/mm_step.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

namespace flatflow {

namespace {

double max_abs(const SurfaceField& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

double m_norm(const Hm1Solver& solver, const SurfaceField& f) { return std::sqrt(solver.inner(f, f)); }

SurfaceField graph_curvature(const DiscreteSurface& ref, const CurvatureData& c, const HeightField& psi) {
  return mean_curvature_normal(graph_surface(ref, c, psi));
}

double residual_of(const Hm1Solver& solver, const SurfaceField& xi, const SurfaceField& Hg, double h) {
  const SurfaceField r = xi / h - solver.apply_laplacian(Hg);
  return m_norm(solver, r);
}

struct StepSystem {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

void build_system(const Hm1Solver& solver, double h, StepSystem& sys) {
  const SparseMatrix& K = solver.stiffness();
  const SurfaceField inv_m = solver.mass().cwiseInverse();
  SparseMatrix A = SparseMatrix(K * inv_m.asDiagonal() * K);
  for (int v = 0; v < solver.size(); ++v) A.coeffRef(v, v) += solver.mass()(v) / h;
  sys.ldlt.compute(A);
  if (sys.ldlt.info() != Eigen::Success) throw SolverError("step operator factorization failed");
}

// Projected, preconditioned descent on the step energy.
bool descend(const DiscreteSurface& ref, const CurvatureData& c, const Hm1Solver& solver,
             const StepSystem& sys, const StepConfig& cfg, double floor, HeightField& psi, int& iters) {
  psi = project_volume(c, solver, psi);
  double e = energy(ref, c, solver, psi, cfg.h).total;
  const int max_iter = std::max(200, 4 * cfg.max_picard);
  for (iters = 0; iters < max_iter; ++iters) {
    const DiscreteSurface g = graph_surface(ref, c, psi);
    const auto grad_p = perimeter_gradient(g);
    const SurfaceField xi = xi_from_height(c, psi);
    const SurfaceField f = solver.solve_poisson(xi);
    const SurfaceField dxi = xi_derivative(c, psi);
    SurfaceField grad(ref.vertex_count());
    for (int v = 0; v < ref.vertex_count(); ++v)
      grad(v) = grad_p[static_cast<std::size_t>(v)].dot(c.normal[static_cast<std::size_t>(v)]) +
                dxi(v) * solver.mass()(v) * f(v) / cfg.h;
    const SurfaceField dir = -sys.ldlt.solve(grad);
    double alpha = 1.0;
    bool accepted = false;
    HeightField trial;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      try {
        trial = project_volume(c, solver, psi + alpha * dir);
        const double et = energy(ref, c, solver, trial, cfg.h).total;
        if (et <= e) {
          e = et;
          accepted = true;
          break;
        }
      } catch (const GraphError&) {
      }
    }
    if (!accepted) return false;
    const double upd = max_abs(trial - psi);
    psi = trial;
    if (upd <= cfg.picard_tol * max_abs(psi) + floor) return true;
  }
  return false;
}

}  // namespace

double effective_delta(double delta, double ubc_radius) { return std::min(delta, ubc_radius / 8.0); }

HeightField project_volume(const CurvatureData& c, const Hm1Solver& solver, HeightField psi) {
  const int nc = solver.component_count();
  const auto& comp = solver.component_index();
  const SurfaceField& m = solver.mass();
  std::vector<double> shift(static_cast<std::size_t>(nc), 0.0);
  for (int it = 0; it < 8; ++it) {
    const SurfaceField xi = xi_from_height(c, psi);
    const SurfaceField dxi = xi_derivative(c, psi);
    std::vector<double> f(static_cast<std::size_t>(nc), 0.0), df(f), scale(f);
    for (int v = 0; v < solver.size(); ++v) {
      const auto k = static_cast<std::size_t>(comp[static_cast<std::size_t>(v)]);
      f[k] += m(v) * xi(v);
      df[k] += m(v) * dxi(v);
      scale[k] += m(v) * std::abs(xi(v));
    }
    bool done = true;
    for (std::size_t k = 0; k < f.size(); ++k) {
      shift[k] = -f[k] / df[k];
      if (std::abs(f[k]) > 1e-15 * scale[k]) done = false;
    }
    if (done) break;
    for (int v = 0; v < solver.size(); ++v) psi(v) += shift[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])];
  }
  return psi;
}

StepEnergy energy(const DiscreteSurface& ref, const CurvatureData& c, const Hm1Solver& solver,
                  const HeightField& psi, double h) {
  StepEnergy e;
  e.perimeter_term = measure(graph_surface(ref, c, psi)).perimeter;
  const double d = solver.hm1_norm(xi_from_height(c, psi));
  e.dissipation_term = d * d / (2.0 * h);
  e.total = e.perimeter_term + e.dissipation_term;
  return e;
}

double el_residual(const DiscreteSurface& ref, const CurvatureData& c, const Hm1Solver& solver,
                   const HeightField& psi, double h) {
  return residual_of(solver, xi_from_height(c, psi), graph_curvature(ref, c, psi), h);
}

StepResult step(const DiscreteSurface& ref, const CurvatureData& c, const Hm1Solver& solver,
                const StepConfig& cfg) {
  if (!(cfg.h > 0.0)) throw Error("time step must be positive");
  if (!(cfg.delta > 0.0)) throw Error("constraint radius must be positive");
  StepResult out;
  out.ubc_radius = estimate_ubc_radius(ref, c);
  out.delta = effective_delta(cfg.delta, out.ubc_radius);

  const int n = ref.vertex_count();
  const SparseMatrix& K = solver.stiffness();
  const SurfaceField& M = solver.mass();
  StepSystem sys;
  build_system(solver, cfg.h, sys);
  const double floor = 1e-14 * ref.bbox_diagonal();

  HeightField psi = HeightField::Zero(n);
  bool converged = false;
  bool folded = false;
  try {
    for (int m = 0; m < cfg.max_picard; ++m) {
      const SurfaceField Hg = graph_curvature(ref, c, psi);
      const SurfaceField xi = xi_from_height(c, psi, out.ubc_radius);
      out.residual_history.push_back(residual_of(solver, xi, Hg, cfg.h));
      const SurfaceField q = xi - psi;
      const SurfaceField lap = (K * psi).cwiseQuotient(M);
      const SurfaceField rhs = -(K * (Hg - lap)) - M.cwiseProduct(q) / cfg.h;
      const HeightField next = sys.ldlt.solve(rhs);
      const double upd = max_abs(next - psi);
      psi = next;
      out.picard_iters = m + 1;
      if (upd <= cfg.picard_tol * max_abs(psi) + floor) {
        converged = true;
        break;
      }
    }
  } catch (const GraphError&) {
    folded = true;
  }
  out.status = converged ? "ok" : (folded ? "fold" : "picard");

  if (!converged && cfg.fallback == Fallback::GradientDescent) {
    HeightField start = folded ? HeightField::Zero(n) : psi;
    int iters = 0;
    try {
      converged = descend(ref, c, solver, sys, cfg, floor, start, iters);
      psi = start;
      folded = false;
    } catch (const GraphError&) {
      converged = false;
    }
    out.used_fallback = true;
    out.picard_iters += iters;
    out.status = converged ? "fallback" : out.status;
  }
  if (folded) {
    out.psi = HeightField::Zero(n);
    out.xi = SurfaceField::Zero(n);
    out.converged = false;
    out.constraint_margin = std::numeric_limits<double>::infinity();
    out.el_residual = std::numeric_limits<double>::infinity();
    return out;
  }

  psi = project_volume(c, solver, psi);
  out.psi = psi;
  out.xi = xi_from_height(c, psi);
  const SurfaceField Hg = graph_curvature(ref, c, psi);
  out.el_residual = residual_of(solver, out.xi, Hg, cfg.h);
  const SurfaceField f = solver.solve_poisson(out.xi);
  out.distance = std::sqrt(std::max(0.0, solver.inner(out.xi, f)));

  const SurfaceField lam = Hg + f / cfg.h;
  out.multiplier_per_component = solver.component_means(lam);
  const SurfaceField centred = solver.remove_means(lam);
  const auto var = solver.component_means(centred.cwiseProduct(centred));
  for (double s : var) out.multiplier_spread.push_back(std::sqrt(std::max(0.0, s)));

  out.constraint_margin = max_abs(psi) / out.delta;
  out.converged = converged && out.constraint_margin <= 1.0;
  if (converged && out.constraint_margin > 1.0) out.status = "constraint";
  return out;
}

}  // namespace flatflow
