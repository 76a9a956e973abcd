#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flatflow/geometry.hpp"
#include "flatflow/mm_step.hpp"
#include "flatflow/remesh.hpp"

namespace flatflow {

struct FlowConfig {
  ShapeSpec shape;
  StepConfig step;
  int n_steps = 0;       ///< 0: derived from t_final
  double t_final = 0.0;  ///< 0: derived from n_steps
  RemeshOptions remesh;
  int snapshot_every = 0;  ///< 0: no snapshots
};

/// One row per accepted step (row 0 is the seed). Field order is the CSV
/// column order.
struct DiagnosticsRow {
  int step = 0;
  double time = 0.0;
  double perimeter = 0.0;
  std::vector<double> volume;
  double distance = 0.0;
  double distance_over_h = 0.0;
  double max_psi = 0.0;
  double l2_psi = 0.0;
  double l2_lap_psi = 0.0;
  double constraint_margin = 0.0;
  double lyapunov = 0.0;
  double el_residual = 0.0;
  int picard_iters = 0;
  double ubc_estimate = 0.0;
  double velocity_max = 0.0;  ///< max |psi| / h
  double velocity_l2 = 0.0;   ///< l2(psi) / h
  double h = 0.0;
  double multiplier = 0.0;  ///< mean lambda over all components
  int remeshed = 0;
};

using FlowDiagnostics = std::vector<DiagnosticsRow>;

enum class FlowStatus { Completed, StepFailure, ShapeHealth, RemeshFailure };

std::string to_string(FlowStatus status);

struct FlowResult {
  DiscreteSurface final_surface;
  FlowDiagnostics diagnostics;
  FlowStatus status = FlowStatus::Completed;
  std::string message;
  double final_time = 0.0;
};

/// Called for the seed and every accepted step.
using FlowObserver = std::function<void(const DiscreteSurface&, const DiagnosticsRow&)>;

/// Validates counts and the n_steps / t_final agreement; returns the step
/// count.
int resolve_step_count(const FlowConfig& cfg);

/// Iterates steps from `seed`, re-referencing onto each accepted surface.
/// On a failed step, h is halved once for the rest of the run and the step
/// retried; a second failure halts.
FlowResult run(const FlowConfig& cfg, const DiscreteSurface& seed, const FlowObserver& observer = {});
FlowResult run(const FlowConfig& cfg, const FlowObserver& observer = {});

struct SelfConvergence {
  std::vector<double> h;
  std::vector<double> errors;  ///< L2 height distance between successive runs
  std::optional<double> order;  ///< absent when exact
  /// All errors below 1e-8 of the bounding-box diagonal: the runs agree to
  /// the stationarity floor of the mesh and no order can be read off.
  bool exact = false;
};

/// Runs the seed at every h to t_final and compares the final surfaces
/// through heights over the finest one.
SelfConvergence self_convergence(const FlowConfig& cfg, const std::vector<double>& h_list, double t_final);

}  // namespace flatflow
