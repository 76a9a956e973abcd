// flatflow command-line driver: run, step, check, spectrum, converge.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatflow/cli_io.hpp"
#include "flatflow/kernels.hpp"
#include "flatflow/laplace_beltrami.hpp"
#include "flatflow/mm_step.hpp"
#include "flatflow/oracles.hpp"
#include "flatflow/remesh.hpp"

namespace fs = std::filesystem;
using namespace flatflow;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  bool quiet = false;
};

struct Loaded {
  FlowConfig cfg;
  std::map<std::string, std::string> digests;
};

Loaded load(const Common& o) {
  Loaded l;
  const std::string text = read_text_file(o.config);
  l.digests["config"] = digest(text);
  l.cfg = parse_config(text, o.overrides);
  if (l.cfg.shape.kind == ShapeKind::File) {
    fs::path p(l.cfg.shape.path);
    if (p.is_relative()) p = fs::path(o.config).parent_path() / p;
    l.cfg.shape.path = p.string();
    l.digests["shape"] = digest(read_text_file(l.cfg.shape.path));
  }
  return l;
}

void add_common(CLI::App* app, Common& o, bool needs_out) {
  app->add_option("--config", o.config, "configuration file")->required()->check(CLI::ExistingFile);
  if (needs_out) app->add_option("--out", o.out, "output directory")->required();
  else app->add_option("--out", o.out, "output directory");
  app->add_option("--override", o.overrides, "section.key=value, repeatable");
  app->add_flag("--quiet", o.quiet, "suppress progress output");
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

int cmd_run(const Common& o) {
  const Loaded in = load(o);
  const FlowConfig& cfg = in.cfg;
  resolve_step_count(cfg);
  fs::create_directories(o.out);
  const fs::path out(o.out);

  std::ofstream csv(out / "diagnostics.csv", std::ios::binary);
  std::string csv_text;
  bool header = false;
  int last_snapshot = -1;
  const auto snap = [&](const DiscreteSurface& s, int step) {
    write_text_file((out / snapshot_name(step, s.is_curve())).string(), snapshot_text(s));
    last_snapshot = step;
  };
  const auto observer = [&](const DiscreteSurface& s, const DiagnosticsRow& row) {
    if (!header) {
      csv_text += diagnostics_header(static_cast<int>(row.volume.size()));
      csv << diagnostics_header(static_cast<int>(row.volume.size()));
      header = true;
    }
    const std::string line = diagnostics_line(row);
    csv_text += line;
    csv << line << std::flush;
    if (cfg.snapshot_every > 0 && row.step % cfg.snapshot_every == 0) snap(s, row.step);
    if (!o.quiet && row.step > 0)
      std::fprintf(stderr, "step %d  t=%.6g  perimeter=%.12g  picard=%d\n", row.step, row.time, row.perimeter,
                   row.picard_iters);
  };

  ManifestInput m;
  m.config = cfg;
  m.command = "run";
  m.input_digests = in.digests;
  std::optional<FlowResult> result;
  try {
    result = run(cfg, observer);
    m.status = to_string(result->status);
    m.message = result->message;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    m.status = "error";
    m.message = e.what();
  }
  csv.close();
  if (result) {
    const int step_final = result->diagnostics.back().step;
    if (last_snapshot != step_final) snap(result->final_surface, step_final);
    m.summary = summarize(result->diagnostics);
  }
  m.exit_status = result && result->status == FlowStatus::Completed ? kOk : kNumerical;
  m.diagnostics_digest = digest(csv_text);
  write_text_file((out / "manifest.json").string(), manifest_json(m));
  if (m.exit_status != kOk) std::fprintf(stderr, "flatflow: %s: %s\n", m.status.c_str(), m.message.c_str());
  else if (!o.quiet)
    std::fprintf(stderr, "completed %d steps, perimeter %.12g -> %.12g\n", m.summary.steps,
                 m.summary.perimeter_initial, m.summary.perimeter_final);
  return m.exit_status;
}

int cmd_step(const Common& o) {
  const Loaded in = load(o);
  const DiscreteSurface s = build_shape(in.cfg.shape);
  const CurvatureData c = compute_curvature(s);
  const Hm1Solver solver = Hm1Solver::assemble(s);
  const StepResult r = step(s, c, solver, in.cfg.step);
  nlohmann::ordered_json j;
  j["status"] = r.status;
  j["converged"] = r.converged;
  j["picard_iters"] = r.picard_iters;
  j["used_fallback"] = r.used_fallback;
  j["distance"] = r.distance;
  j["max_psi"] = r.psi.size() ? r.psi.cwiseAbs().maxCoeff() : 0.0;
  j["multiplier_per_component"] = r.multiplier_per_component;
  j["multiplier_spread"] = r.multiplier_spread;
  j["el_residual"] = r.el_residual;
  j["constraint_margin"] = r.constraint_margin;
  j["delta"] = std::isfinite(r.delta) ? nlohmann::ordered_json(r.delta) : nlohmann::ordered_json("inf");
  j["ubc_radius"] = r.ubc_radius;
  j["residual_history"] = r.residual_history;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    const fs::path out(o.out);
    write_text_file((out / "step.json").string(), text);
    if (r.converged) write_text_file((out / snapshot_name(1, s.is_curve())).string(),
                                     snapshot_text(graph_surface(s, c, r.psi)));
    ManifestInput m;
    m.config = in.cfg;
    m.command = "step";
    m.input_digests = in.digests;
    m.exit_status = r.converged ? kOk : kNumerical;
    m.status = r.status;
    m.diagnostics_digest = digest(text);
    write_text_file((out / "manifest.json").string(), manifest_json(m));
  }
  return r.converged ? kOk : kNumerical;
}

int cmd_check(const Common& o) {
  const Loaded in = load(o);
  const DiscreteSurface s = build_shape(in.cfg.shape);
  const CurvatureData c = compute_curvature(s);
  const Measure meas = measure(s);
  const UbcEstimate ubc = estimate_ubc(s, c);
  const MeshQuality q = mesh_quality(s);
  const auto degenerate = s.degenerate_vertices();
  nlohmann::ordered_json j;
  j["mode"] = s.is_curve() ? "curve2d" : "mesh3d";
  j["vertices"] = s.vertex_count();
  j["components"] = s.component_count();
  j["perimeter"] = meas.perimeter;
  j["volume"] = meas.volume;
  j["bbox_diagonal"] = s.bbox_diagonal();
  j["ubc_radius"] = ubc.radius;
  j["ubc_curvature_radius"] = ubc.curvature_radius;
  j["ubc_proximity_radius"] = ubc.proximity_radius;
  j["ubc_limiting_vertex"] = ubc.limiting_vertex;
  j["edge_ratio"] = q.edge_ratio;
  if (!s.is_curve()) j["min_angle_deg"] = q.min_angle_deg;
  j["needs_remesh"] = needs_remesh(s, in.cfg.remesh);
  j["degenerate_vertices"] = degenerate;
  j["mean_curvature_min"] = c.H_area.minCoeff();
  j["mean_curvature_max"] = c.H_area.maxCoeff();
  j["stationarity"] = stationarity_check(s);
  const double delta = effective_delta(in.cfg.step.delta, ubc.radius);
  j["effective_delta"] = std::isfinite(delta) ? nlohmann::ordered_json(delta) : nlohmann::ordered_json("inf");
  const bool healthy = degenerate.empty() && ubc.radius > 0.0;
  j["healthy"] = healthy;
  std::cout << j.dump(2) << "\n";
  return healthy ? kOk : kNumerical;
}

int cmd_spectrum(const std::string& shape, double R, int kmax, bool verify) {
  const RoundShape rs = shape == "sphere" ? RoundShape::Sphere : RoundShape::Circle;
  std::printf("%s R=%s\n", shape.c_str(), format_double(R).c_str());
  std::printf("%4s %24s\n", rs == RoundShape::Circle ? "k" : "l", "rate");
  for (int k = 0; k <= kmax; ++k) std::printf("%4d %24s\n", k, format_double(linear_rate(rs, R, k)).c_str());
  if (!verify) return kOk;
  const auto checks = verify_rates();
  std::cout << rate_report_json(checks) << "\n";
  for (const auto& c : checks)
    if (!c.pass) return kNumerical;
  return kOk;
}

int cmd_converge(const Common& o, std::vector<double> hs, double t_final) {
  const Loaded in = load(o);
  if (hs.empty()) hs = {in.cfg.step.h, in.cfg.step.h / 2, in.cfg.step.h / 4};
  if (t_final <= 0.0) t_final = resolve_step_count(in.cfg) * in.cfg.step.h;
  const SelfConvergence sc = self_convergence(in.cfg, hs, t_final);
  std::ostringstream os;
  os << "h,error\n";
  for (std::size_t i = 0; i < sc.errors.size(); ++i)
    os << format_double(sc.h[i]) << "," << format_double(sc.errors[i]) << "\n";
  os << "# order " << (sc.order ? format_double(*sc.order) : std::string("n/a")) << (sc.exact ? " (round-off)" : "")
     << "\n";
  std::cout << os.str();
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    const fs::path out(o.out);
    write_text_file((out / "convergence.csv").string(), os.str());
    ManifestInput m;
    m.config = in.cfg;
    m.command = "converge";
    m.input_digests = in.digests;
    m.status = "completed";
    m.message = "h = " + join(hs);
    m.diagnostics_digest = digest(os.str());
    write_text_file((out / "manifest.json").string(), manifest_json(m));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  kernels::configure_threads();
  CLI::App app{"Minimizing-movements surface diffusion for curves and surfaces", "flatflow"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Common run_o, step_o, check_o, conv_o;
  auto* run_cmd = app.add_subcommand("run", "run the flow and write diagnostics, snapshots and a manifest");
  add_common(run_cmd, run_o, true);
  auto* step_cmd = app.add_subcommand("step", "take one step from the configured shape and print the result");
  add_common(step_cmd, step_o, false);
  auto* check_cmd = app.add_subcommand("check", "geometry health report for the configured shape");
  add_common(check_cmd, check_o, false);

  std::string shape = "circle";
  double R = 1.0;
  int kmax = 5;
  bool verify = false;
  auto* spec_cmd = app.add_subcommand("spectrum", "linearized decay rates about the circle or sphere");
  spec_cmd->add_option("--shape", shape, "circle or sphere")->check(CLI::IsMember({"circle", "sphere"}));
  spec_cmd->add_option("--R", R, "radius")->check(CLI::PositiveNumber);
  spec_cmd->add_option("--kmax", kmax, "largest mode")->check(CLI::NonNegativeNumber);
  spec_cmd->add_flag("--verify", verify, "also run the brute-force rate verification");

  std::vector<double> hs;
  double t_final = 0.0;
  auto* conv_cmd = app.add_subcommand("converge", "self-convergence table in the time step");
  add_common(conv_cmd, conv_o, false);
  conv_cmd->add_option("--hs", hs, "time steps, coarsest first (default h, h/2, h/4)");
  conv_cmd->add_option("--t-final", t_final, "common final time (default from the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_o);
    if (*step_cmd) return cmd_step(step_o);
    if (*check_cmd) return cmd_check(check_o);
    if (*spec_cmd) return cmd_spectrum(shape, R, kmax, verify);
    if (*conv_cmd) return cmd_converge(conv_o, hs, t_final);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "flatflow: config error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "flatflow: %s\n", e.what());
    return kNumerical;
  }
  return kUsage;
}
