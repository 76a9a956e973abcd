#include <doctest.h>

#include <json.hpp>

#include "flatflow/cli_io.hpp"
#include "flatflow/error.hpp"

using namespace flatflow;

namespace {

const char* kMinimal = R"([shape]
type = circle
R = 1
n = 256

[step]
h = 1e-4

[flow]
steps = 100
)";

std::string config_error(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
  const FlowConfig c = parse_config(kMinimal);
  CHECK(c.shape.kind == ShapeKind::Circle);
  CHECK(c.shape.R == 1.0);
  CHECK(c.shape.n == 256);
  CHECK(c.step.h == 1e-4);
  CHECK(c.n_steps == 100);
  CHECK(c.t_final == 0.0);
  CHECK(std::isinf(c.step.delta));
  CHECK(c.step.max_picard == 50);
  CHECK(c.step.picard_tol == 1e-10);
  CHECK(c.step.fallback == Fallback::GradientDescent);
  CHECK(c.remesh.policy == RemeshPolicy::Auto);
  CHECK(c.remesh.arc_length_ratio == 1.5);
  CHECK(c.remesh.min_angle_deg == 15.0);
  CHECK(c.remesh.edge_ratio_cap == 4.0);
  CHECK(c.snapshot_every == 0);
}

TEST_CASE("errors name the key and the line") {
  CHECK(contains(config_error(std::string(kMinimal) + "\n[step]\ndelta = -0.1\n"), "delta"));

  const std::string neg = "[shape]\ntype = circle\n[step]\nh = 1e-4\ndelta = -0.1\n[flow]\nsteps = 1\n";
  const std::string e = config_error(neg);
  CHECK(contains(e, "'delta'"));
  CHECK(contains(e, "line 5"));

  const std::string dup = config_error("[shape]\ntype = circle\n[step]\nh = 1e-4\nh = 2e-4\n[flow]\nsteps = 1\n");
  CHECK(contains(dup, "duplicate"));
  CHECK(contains(dup, "'h'"));
  CHECK(contains(dup, "lines 4 and 5"));

  const std::string unknown = config_error("[shape]\ntype = circle\nradius = 2\n");
  CHECK(contains(unknown, "'radius'"));
  CHECK(contains(unknown, "line 3"));
  CHECK(contains(config_error("[mesh]\nn = 2\n"), "[mesh]"));

  const std::string type = config_error("[shape]\ntype = circle\nn = many\n[step]\nh = 1e-4\n[flow]\nsteps = 1\n");
  CHECK(contains(type, "'n'"));
  CHECK(contains(type, "integer"));
  CHECK(contains(type, "line 3"));

  CHECK(contains(config_error("[shape]\ntype = blob\n"), "blob"));
  CHECK(contains(config_error("[shape]\ntype = circle\n[flow]\nsteps = 1\n"), "'h'"));
  CHECK(contains(config_error("[shape]\ntype = circle\n[step]\nh = 1e-4\n"), "steps"));
  CHECK(contains(config_error("type = circle\n"), "outside a section"));
  CHECK(contains(config_error("[shape]\ntype circle\n"), "line 2"));
  CHECK(contains(config_error(std::string(kMinimal) + "t_final = 0.5\n"), "t_final"));
}

TEST_CASE("comments and whitespace") {
  const FlowConfig c = parse_config("# header\n[shape]  \n  type = ellipse ; inline\na=1.5\nb = 0.5\n\n[step]\nh=1e-3\n[flow]\nt_final = 1e-2\n");
  CHECK(c.shape.kind == ShapeKind::Ellipse);
  CHECK(c.shape.a == 1.5);
  CHECK(c.t_final == 1e-2);
}

TEST_CASE("override equivalence") {
  const FlowConfig edited = parse_config(std::string(kMinimal) + "\n[output]\nsnapshot_every = 5\n[step]\ndelta = 0.01\n");
  const FlowConfig overridden = parse_config(kMinimal, {"output.snapshot_every=5", "step.delta = 0.01"});
  CHECK(config_text(edited) == config_text(overridden));
  CHECK(config_json(edited) == config_json(overridden));
  // Overrides replace file values.
  CHECK(parse_config(kMinimal, {"step.h=2e-4"}).step.h == 2e-4);
  CHECK(contains(config_error(kMinimal, {"step.hh=1"}), "'hh'"));
  CHECK(contains(config_error(kMinimal, {"h=1"}), "section.key"));
  CHECK(contains(config_error(kMinimal, {"step.delta=-1"}), "(override)"));
}

TEST_CASE("config_text round-trips") {
  FlowConfig c = parse_config(kMinimal, {"shape.type=perturbed_sphere", "shape.amplitude=0.1234567890123",
                                         "shape.center=1,2,3", "step.delta=0.3", "flow.remesh=off"});
  const FlowConfig back = parse_config(config_text(c));
  CHECK(config_text(back) == config_text(c));
  CHECK(back.shape.amplitude == c.shape.amplitude);
  CHECK(back.shape.center == Vec3(1, 2, 3));
  CHECK(back.remesh.policy == RemeshPolicy::Off);
  const auto j = nlohmann::json::parse(config_json(c));
  CHECK(j["step"]["delta"] == 0.3);
  CHECK(j["shape"]["type"] == "perturbed_sphere");
}

TEST_CASE("number formatting is lossless") {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("diagnostics csv") {
  DiagnosticsRow r;
  r.step = 3;
  r.time = 0.1;
  r.volume = {1.0, 2.0};
  r.picard_iters = 4;
  r.remeshed = 1;
  const std::string csv = diagnostics_csv({r});
  CHECK(csv.rfind("# flatflow-diag v1\n", 0) == 0);
  CHECK(contains(csv, "step,time,perimeter,volume_0,volume_1,distance,distance_over_h,max_psi,l2_psi,l2_lap_psi,"
                      "constraint_margin,lyapunov,el_residual,picard_iters,ubc_estimate,velocity_max,velocity_l2,h,"
                      "multiplier,remeshed\n"));
  const std::string line = diagnostics_line(r);
  CHECK(line.rfind("3,0.10000000000000001,0,1,2,", 0) == 0);
  CHECK(std::count(line.begin(), line.end(), ',') == 19);
}

TEST_CASE("digest and names") {
  CHECK(digest("") == "cbf29ce484222325");
  CHECK(digest("a") == "af63dc4c8601ec8c");
  CHECK(snapshot_name(123, false) == "snap_000123.off");
  CHECK(snapshot_name(7, true) == "snap_000007.json");
}

TEST_CASE("summary and manifest") {
  FlowDiagnostics rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].step = i;
    rows[i].perimeter = 10.0 - i;
    rows[i].volume = {1.0 + 1e-9 * i};
    rows[i].h = 0.5;
    rows[i].distance = i ? 1.0 : 0.0;
    rows[i].constraint_margin = 0.1 * i;
  }
  const RunSummary s = summarize(rows);
  CHECK(s.steps == 2);
  CHECK(s.dissipation_sum == 2.0);
  CHECK(s.max_volume_drift == doctest::Approx(2e-9));
  CHECK(s.max_constraint_margin == doctest::Approx(0.2));
  CHECK(s.perimeter_monotone);

  ManifestInput m;
  m.config = parse_config(kMinimal);
  m.command = "run";
  m.input_digests = {{"config", digest(kMinimal)}};
  m.status = "completed";
  m.summary = s;
  m.diagnostics_digest = digest("x");
  const std::string text = manifest_json(m);
  CHECK(text == manifest_json(m));
  const auto j = nlohmann::json::parse(text);
  for (const char* key : {"tool", "version", "command", "config", "input_digests", "exit_status", "status", "message",
                          "metrics", "diagnostics_digest"})
    CHECK(j.contains(key));
  CHECK(j["config"]["step"]["h"] == 1e-4);
  CHECK(j["metrics"]["perimeter_drop"] == 2.0);
}
