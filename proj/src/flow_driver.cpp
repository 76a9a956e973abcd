#include "flatflow/flow_driver.hpp"

#include <algorithm>
#include <cmath>

#include "flatflow/laplace_beltrami.hpp"
#include "flatflow/normal_graph.hpp"

namespace flatflow {

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Completed: return "completed";
    case FlowStatus::StepFailure: return "step_failure";
    case FlowStatus::ShapeHealth: return "shape_health";
    case FlowStatus::RemeshFailure: return "remesh_failure";
  }
  return "unknown";
}

int resolve_step_count(const FlowConfig& cfg) {
  const double h = cfg.step.h;
  if (!(h > 0.0)) throw Error("time step must be positive");
  if (cfg.n_steps < 0 || cfg.t_final < 0.0) throw Error("step count and final time must be non-negative");
  if (cfg.n_steps == 0 && cfg.t_final == 0.0) throw Error("either n_steps or t_final is required");
  if (cfg.t_final == 0.0) return cfg.n_steps;
  const double ratio = cfg.t_final / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
    throw Error("t_final is not a whole number of steps of size h");
  if (cfg.n_steps > 0 && cfg.n_steps != static_cast<int>(rounded))
    throw Error("n_steps and t_final disagree: n_steps * h must equal t_final");
  return static_cast<int>(rounded);
}

namespace {

DiagnosticsRow seed_row(const DiscreteSurface& s, double ubc) {
  DiagnosticsRow row;
  const Measure m = measure(s);
  row.perimeter = m.perimeter;
  row.volume = m.volume;
  row.ubc_estimate = ubc;
  return row;
}

}  // namespace

FlowResult run(const FlowConfig& cfg, const DiscreteSurface& seed, const FlowObserver& observer) {
  const int n_steps = resolve_step_count(cfg);
  const double t_final = n_steps * cfg.step.h;
  FlowResult out{seed, {}, FlowStatus::Completed, {}, 0.0};
  DiscreteSurface current = seed;
  {
    const CurvatureData c = compute_curvature(current);
    out.diagnostics.push_back(seed_row(current, estimate_ubc_radius(current, c)));
    if (observer) observer(current, out.diagnostics.back());
  }
  StepConfig scfg = cfg.step;
  bool halved = false;
  double t = 0.0;
  int k = 0;
  while (t < t_final * (1.0 - 1e-12)) {
    const CurvatureData c = compute_curvature(current);
    const Hm1Solver solver = Hm1Solver::assemble(current);
    StepResult r = step(current, c, solver, scfg);
    if (std::isfinite(scfg.delta) && r.ubc_radius < 2.0 * scfg.delta) {
      out.status = FlowStatus::ShapeHealth;
      out.message = "UBC estimate " + std::to_string(r.ubc_radius) + " fell below twice the constraint radius";
      break;
    }
    if (!r.converged) {
      if (halved) {
        out.status = FlowStatus::StepFailure;
        out.message = "step " + std::to_string(k + 1) + " failed after halving h: " + r.status;
        break;
      }
      halved = true;
      scfg.h *= 0.5;
      continue;
    }
    DiscreteSurface next = graph_surface(current, c, r.psi);
    bool changed = false;
    try {
      next = remesh(next, cfg.remesh, &changed);
    } catch (const Error& e) {
      out.status = FlowStatus::RemeshFailure;
      out.message = e.what();
      break;
    }
    ++k;
    t += scfg.h;
    DiagnosticsRow row;
    row.step = k;
    row.time = t;
    const Measure m = measure(next);
    row.perimeter = m.perimeter;
    row.volume = m.volume;
    row.distance = r.distance;
    row.distance_over_h = r.distance / scfg.h;
    row.max_psi = r.psi.cwiseAbs().maxCoeff();
    row.l2_psi = std::sqrt(solver.inner(r.psi, r.psi));
    const SurfaceField lap = solver.apply_laplacian(r.psi);
    row.l2_lap_psi = std::sqrt(solver.inner(lap, lap));
    row.constraint_margin = r.constraint_margin;
    row.lyapunov = solver.inner(r.xi, r.xi) + 0.5 * scfg.h * solver.inner(lap, lap);
    row.el_residual = r.el_residual;
    row.picard_iters = r.picard_iters;
    row.ubc_estimate = r.ubc_radius;
    row.velocity_max = row.max_psi / scfg.h;
    row.velocity_l2 = row.l2_psi / scfg.h;
    row.h = scfg.h;
    double lam = 0.0;
    for (double x : r.multiplier_per_component) lam += x;
    row.multiplier = lam / static_cast<double>(r.multiplier_per_component.size());
    row.remeshed = changed ? 1 : 0;
    out.diagnostics.push_back(row);
    current = std::move(next);
    if (observer) observer(current, out.diagnostics.back());
  }
  out.final_surface = current;
  out.final_time = t;
  return out;
}

FlowResult run(const FlowConfig& cfg, const FlowObserver& observer) {
  return run(cfg, build_shape(cfg.shape), observer);
}

SelfConvergence self_convergence(const FlowConfig& cfg, const std::vector<double>& h_list, double t_final) {
  if (h_list.size() < 2) throw Error("self-convergence needs at least two time steps");
  SelfConvergence out;
  out.h = h_list;
  std::vector<DiscreteSurface> finals;
  for (double h : h_list) {
    FlowConfig c = cfg;
    c.step.h = h;
    c.t_final = t_final;
    c.n_steps = 0;
    c.snapshot_every = 0;
    resolve_step_count(c);
    FlowResult r = run(c);
    if (r.status != FlowStatus::Completed)
      throw Error("self-convergence run at h = " + std::to_string(h) + " failed: " + r.message);
    finals.push_back(std::move(r.final_surface));
  }
  const DiscreteSurface& finest = finals.back();
  const CurvatureData c = compute_curvature(finest);
  const SurfaceField mass = vertex_measure(finest);
  std::vector<HeightField> heights;
  for (const auto& f : finals) heights.push_back(height_between(finest, c, f));
  for (std::size_t i = 0; i + 1 < heights.size(); ++i) {
    const SurfaceField d = heights[i] - heights[i + 1];
    out.errors.push_back(std::sqrt((d.array().square() * mass.array()).sum()));
  }
  const double floor = 1e-8 * finest.bbox_diagonal();
  out.exact = std::all_of(out.errors.begin(), out.errors.end(), [&](double e) { return e <= floor; });
  if (!out.exact && out.errors.size() >= 2 && out.errors[out.errors.size() - 1] > floor) {
    const std::size_t n = out.errors.size();
    out.order = std::log2(out.errors[n - 2] / out.errors[n - 1]);
  }
  return out;
}

}  // namespace flatflow
