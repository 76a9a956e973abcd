#include "flatflow/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace flatflow {

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"shape", {"type", "R", "a", "b", "n", "subdiv", "mode", "order", "amplitude", "center", "path"}},
      {"step", {"h", "delta", "max_picard", "picard_tol", "fallback"}},
      {"flow", {"steps", "t_final", "remesh", "remesh_ratio", "min_angle", "edge_ratio_cap", "smoothing_passes"}},
      {"output", {"snapshot_every"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const std::string& key, const ConfigEntry& e) {
  const auto dot = key.find('.');
  const std::string name = key.substr(dot + 1);
  std::string out = "key '" + name + "' in [" + key.substr(0, dot) + "]";
  if (e.line > 0) out += " at line " + std::to_string(e.line);
  else out += " (override)";
  return out;
}

void check_key(const std::string& key, int line) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("key '" + key + "' must be written as section.key");
  const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
  const auto it = known_keys().find(section);
  const std::string at = line > 0 ? " at line " + std::to_string(line) : " (override)";
  if (it == known_keys().end()) throw ConfigError("unknown section [" + section + "]" + at);
  if (!it->second.count(name)) throw ConfigError("unknown key '" + name + "' in [" + section + "]" + at);
}

class Reader {
 public:
  explicit Reader(const std::map<std::string, ConfigEntry>& e) : entries_(e) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  double number(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second.value;
    if (v == "inf") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || !std::isfinite(x))
      throw ConfigError(where(key, it->second) + ": expected a number, got '" + v + "'");
    return x;
  }

  int integer(const std::string& key, int fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second.value;
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0') throw ConfigError(where(key, it->second) + ": expected an integer, got '" + v + "'");
    return static_cast<int>(x);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.value;
  }

  void require(bool ok, const std::string& key, const std::string& what) const {
    if (ok) return;
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("key '" + key.substr(key.find('.') + 1) + "' in [" + key.substr(0, key.find('.')) + "]: " + what);
    throw ConfigError(where(key, it->second) + ": " + what);
  }

 private:
  const std::map<std::string, ConfigEntry>& entries_;
};

const std::map<std::string, ShapeKind>& shape_names() {
  static const std::map<std::string, ShapeKind> m = {
      {"circle", ShapeKind::Circle},         {"ellipse", ShapeKind::Ellipse},
      {"perturbed_circle", ShapeKind::PerturbedCircle}, {"sphere", ShapeKind::Sphere},
      {"perturbed_sphere", ShapeKind::PerturbedSphere}, {"file", ShapeKind::File}};
  return m;
}

const std::map<std::string, RemeshPolicy>& remesh_names() {
  static const std::map<std::string, RemeshPolicy> m = {{"auto", RemeshPolicy::Auto},
                                                        {"arc_length_2d", RemeshPolicy::ArcLength2D},
                                                        {"quality_3d", RemeshPolicy::Quality3D},
                                                        {"off", RemeshPolicy::Off}};
  return m;
}

template <class E>
std::string name_of(const std::map<std::string, E>& m, E value) {
  for (const auto& [k, v] : m)
    if (v == value) return k;
  return "?";
}

}  // namespace

std::map<std::string, ConfigEntry> parse_config_entries(const std::string& text) {
  std::map<std::string, ConfigEntry> out;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto pos = raw.find_first_of("#;"); pos != std::string::npos) raw.resize(pos);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header at line " + std::to_string(line));
      section = trim(s.substr(1, s.size() - 2));
      if (!known_keys().count(section))
        throw ConfigError("unknown section [" + section + "] at line " + std::to_string(line));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value at line " + std::to_string(line));
    if (section.empty()) throw ConfigError("key outside a section at line " + std::to_string(line));
    const std::string key = section + "." + trim(s.substr(0, eq));
    check_key(key, line);
    if (const auto it = out.find(key); it != out.end())
      throw ConfigError("duplicate key '" + key.substr(key.find('.') + 1) + "' in [" + section + "] at lines " +
                        std::to_string(it->second.line) + " and " + std::to_string(line));
    out[key] = {trim(s.substr(eq + 1)), line};
  }
  return out;
}

void apply_overrides(std::map<std::string, ConfigEntry>& entries, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not of the form section.key=value");
    const std::string key = trim(o.substr(0, eq));
    check_key(key, 0);
    entries[key] = {trim(o.substr(eq + 1)), 0};
  }
}

FlowConfig config_from_entries(const std::map<std::string, ConfigEntry>& entries) {
  const Reader r(entries);
  FlowConfig cfg;
  ShapeSpec& sh = cfg.shape;

  r.require(r.has("shape.type"), "shape.type", "is required");
  const std::string type = r.text("shape.type", "");
  r.require(shape_names().count(type) > 0, "shape.type", "unknown shape '" + type + "'");
  sh.kind = shape_names().at(type);
  sh.R = r.number("shape.R", 1.0);
  sh.a = r.number("shape.a", 1.0);
  sh.b = r.number("shape.b", 1.0);
  sh.n = r.integer("shape.n", 256);
  sh.subdiv = r.integer("shape.subdiv", 3);
  sh.mode = r.integer("shape.mode", 2);
  sh.order = r.integer("shape.order", 0);
  sh.amplitude = r.number("shape.amplitude", 0.0);
  sh.path = r.text("shape.path", "");
  if (r.has("shape.center")) {
    std::vector<double> c;
    std::stringstream ss(r.text("shape.center", ""));
    std::string item;
    while (std::getline(ss, item, ',')) {
      char* end = nullptr;
      const std::string t = trim(item);
      const double x = std::strtod(t.c_str(), &end);
      r.require(!t.empty() && *end == '\0', "shape.center", "expected comma-separated numbers");
      c.push_back(x);
    }
    r.require(c.size() == 2 || c.size() == 3, "shape.center", "expected 2 or 3 coordinates");
    sh.center = Vec3(c[0], c[1], c.size() == 3 ? c[2] : 0.0);
  }
  r.require(sh.R > 0.0, "shape.R", "must be positive");
  r.require(sh.a > 0.0, "shape.a", "must be positive");
  r.require(sh.b > 0.0, "shape.b", "must be positive");
  r.require(sh.n >= 8, "shape.n", "must be at least 8");
  r.require(sh.subdiv >= 1, "shape.subdiv", "must be at least 1");
  r.require(sh.mode >= 0, "shape.mode", "must be non-negative");
  r.require(sh.order >= 0 && sh.order <= sh.mode, "shape.order", "must satisfy 0 <= order <= mode");
  r.require(std::abs(sh.amplitude) < sh.R, "shape.amplitude", "must be below R in magnitude");
  r.require(sh.kind != ShapeKind::File || !sh.path.empty(), "shape.path", "is required for type = file");

  StepConfig& st = cfg.step;
  r.require(r.has("step.h"), "step.h", "is required");
  st.h = r.number("step.h", 0.0);
  st.delta = r.number("step.delta", std::numeric_limits<double>::infinity());
  st.max_picard = r.integer("step.max_picard", 50);
  st.picard_tol = r.number("step.picard_tol", 1e-10);
  const std::string fb = r.text("step.fallback", "gradient_descent");
  r.require(fb == "none" || fb == "gradient_descent", "step.fallback", "expected none or gradient_descent");
  st.fallback = fb == "none" ? Fallback::None : Fallback::GradientDescent;
  r.require(st.h > 0.0, "step.h", "must be positive");
  r.require(st.delta > 0.0, "step.delta", "must be positive");
  r.require(st.max_picard >= 1, "step.max_picard", "must be at least 1");
  r.require(st.picard_tol > 0.0, "step.picard_tol", "must be positive");

  cfg.n_steps = r.integer("flow.steps", 0);
  cfg.t_final = r.number("flow.t_final", 0.0);
  r.require(cfg.n_steps >= 0, "flow.steps", "must be non-negative");
  r.require(cfg.t_final >= 0.0, "flow.t_final", "must be non-negative");
  r.require(cfg.n_steps > 0 || cfg.t_final > 0.0, "flow.steps", "either steps or t_final is required");
  if (cfg.n_steps > 0 && cfg.t_final > 0.0)
    r.require(std::abs(cfg.n_steps * st.h - cfg.t_final) <= 1e-9 * cfg.t_final, "flow.t_final",
              "must equal steps * h");
  const std::string rm = r.text("flow.remesh", "auto");
  r.require(remesh_names().count(rm) > 0, "flow.remesh", "expected auto, arc_length_2d, quality_3d or off");
  cfg.remesh.policy = remesh_names().at(rm);
  cfg.remesh.arc_length_ratio = r.number("flow.remesh_ratio", 1.5);
  cfg.remesh.min_angle_deg = r.number("flow.min_angle", 15.0);
  cfg.remesh.edge_ratio_cap = r.number("flow.edge_ratio_cap", 4.0);
  cfg.remesh.smoothing_passes = r.integer("flow.smoothing_passes", 3);
  r.require(cfg.remesh.arc_length_ratio > 1.0, "flow.remesh_ratio", "must exceed 1");
  r.require(cfg.remesh.min_angle_deg > 0.0 && cfg.remesh.min_angle_deg < 60.0, "flow.min_angle",
            "must lie in (0, 60)");
  r.require(cfg.remesh.edge_ratio_cap > 1.0, "flow.edge_ratio_cap", "must exceed 1");
  r.require(cfg.remesh.smoothing_passes >= 0, "flow.smoothing_passes", "must be non-negative");

  cfg.snapshot_every = r.integer("output.snapshot_every", 0);
  r.require(cfg.snapshot_every >= 0, "output.snapshot_every", "must be non-negative");
  return cfg;
}

FlowConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  auto entries = parse_config_entries(text);
  apply_overrides(entries, overrides);
  return config_from_entries(entries);
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string config_text(const FlowConfig& c) {
  std::ostringstream os;
  const ShapeSpec& s = c.shape;
  os << "[shape]\n"
     << "type = " << name_of(shape_names(), s.kind) << "\n"
     << "R = " << format_double(s.R) << "\n"
     << "a = " << format_double(s.a) << "\n"
     << "b = " << format_double(s.b) << "\n"
     << "n = " << s.n << "\n"
     << "subdiv = " << s.subdiv << "\n"
     << "mode = " << s.mode << "\n"
     << "order = " << s.order << "\n"
     << "amplitude = " << format_double(s.amplitude) << "\n"
     << "center = " << format_double(s.center.x()) << ", " << format_double(s.center.y()) << ", "
     << format_double(s.center.z()) << "\n";
  if (!s.path.empty()) os << "path = " << s.path << "\n";
  os << "\n[step]\n"
     << "h = " << format_double(c.step.h) << "\n"
     << "delta = " << format_double(c.step.delta) << "\n"
     << "max_picard = " << c.step.max_picard << "\n"
     << "picard_tol = " << format_double(c.step.picard_tol) << "\n"
     << "fallback = " << (c.step.fallback == Fallback::None ? "none" : "gradient_descent") << "\n"
     << "\n[flow]\n";
  if (c.n_steps > 0) os << "steps = " << c.n_steps << "\n";
  if (c.t_final > 0.0) os << "t_final = " << format_double(c.t_final) << "\n";
  os << "remesh = " << name_of(remesh_names(), c.remesh.policy) << "\n"
     << "remesh_ratio = " << format_double(c.remesh.arc_length_ratio) << "\n"
     << "min_angle = " << format_double(c.remesh.min_angle_deg) << "\n"
     << "edge_ratio_cap = " << format_double(c.remesh.edge_ratio_cap) << "\n"
     << "smoothing_passes = " << c.remesh.smoothing_passes << "\n"
     << "\n[output]\n"
     << "snapshot_every = " << c.snapshot_every << "\n";
  return os.str();
}

namespace {

nlohmann::ordered_json number_json(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

nlohmann::ordered_json config_object(const FlowConfig& c) {
  nlohmann::ordered_json j;
  const ShapeSpec& s = c.shape;
  j["shape"] = {{"type", name_of(shape_names(), s.kind)},
                {"R", s.R},
                {"a", s.a},
                {"b", s.b},
                {"n", s.n},
                {"subdiv", s.subdiv},
                {"mode", s.mode},
                {"order", s.order},
                {"amplitude", s.amplitude},
                {"center", {s.center.x(), s.center.y(), s.center.z()}},
                {"path", s.path}};
  j["step"] = {{"h", c.step.h},
               {"delta", number_json(c.step.delta)},
               {"max_picard", c.step.max_picard},
               {"picard_tol", c.step.picard_tol},
               {"fallback", c.step.fallback == Fallback::None ? "none" : "gradient_descent"}};
  j["flow"] = {{"steps", c.n_steps},
               {"t_final", c.t_final},
               {"remesh", name_of(remesh_names(), c.remesh.policy)},
               {"remesh_ratio", c.remesh.arc_length_ratio},
               {"min_angle", c.remesh.min_angle_deg},
               {"edge_ratio_cap", c.remesh.edge_ratio_cap},
               {"smoothing_passes", c.remesh.smoothing_passes}};
  j["output"] = {{"snapshot_every", c.snapshot_every}};
  return j;
}

}  // namespace

std::string config_json(const FlowConfig& cfg) { return config_object(cfg).dump(2); }

std::string diagnostics_header(int components) {
  std::string h = "# flatflow-diag v1\nstep,time,perimeter";
  for (int c = 0; c < components; ++c) h += ",volume_" + std::to_string(c);
  h += ",distance,distance_over_h,max_psi,l2_psi,l2_lap_psi,constraint_margin,lyapunov,el_residual,"
       "picard_iters,ubc_estimate,velocity_max,velocity_l2,h,multiplier,remeshed\n";
  return h;
}

std::string diagnostics_line(const DiagnosticsRow& r) {
  std::string s = std::to_string(r.step) + "," + format_double(r.time) + "," + format_double(r.perimeter);
  for (double v : r.volume) s += "," + format_double(v);
  for (double v : {r.distance, r.distance_over_h, r.max_psi, r.l2_psi, r.l2_lap_psi, r.constraint_margin,
                   r.lyapunov, r.el_residual})
    s += "," + format_double(v);
  s += "," + std::to_string(r.picard_iters);
  for (double v : {r.ubc_estimate, r.velocity_max, r.velocity_l2, r.h, r.multiplier}) s += "," + format_double(v);
  s += "," + std::to_string(r.remeshed) + "\n";
  return s;
}

std::string diagnostics_csv(const FlowDiagnostics& rows) {
  std::string out = diagnostics_header(rows.empty() ? 0 : static_cast<int>(rows.front().volume.size()));
  for (const auto& r : rows) out += diagnostics_line(r);
  return out;
}

std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string snapshot_name(int step, bool curve) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06d.%s", step, curve ? "json" : "off");
  return buf;
}

std::string snapshot_text(const DiscreteSurface& s) { return s.is_curve() ? curve_json(s) : off_text(s); }

RunSummary summarize(const FlowDiagnostics& rows) {
  RunSummary s;
  if (rows.empty()) return s;
  s.steps = rows.back().step;
  s.final_time = rows.back().time;
  s.perimeter_initial = rows.front().perimeter;
  s.perimeter_final = rows.back().perimeter;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    for (std::size_t c = 0; c < r.volume.size(); ++c)
      s.max_volume_drift = std::max(s.max_volume_drift, std::abs(r.volume[c] / rows.front().volume[c] - 1.0));
    s.dissipation_sum += r.distance * r.distance / (2.0 * r.h);
    s.max_constraint_margin = std::max(s.max_constraint_margin, r.constraint_margin);
    s.max_el_residual = std::max(s.max_el_residual, r.el_residual);
    if (r.perimeter > rows[i - 1].perimeter && !r.remeshed) s.perimeter_monotone = false;
  }
  return s;
}

std::string tool_version() { return "flatflow 1.0.0"; }

std::string manifest_json(const ManifestInput& m) {
  nlohmann::ordered_json j;
  j["tool"] = "flatflow";
  j["version"] = tool_version();
  j["command"] = m.command;
  j["config"] = config_object(m.config);
  j["input_digests"] = m.input_digests;
  j["exit_status"] = m.exit_status;
  j["status"] = m.status;
  j["message"] = m.message;
  const RunSummary& s = m.summary;
  j["metrics"] = {{"steps", s.steps},
                  {"final_time", s.final_time},
                  {"perimeter_initial", s.perimeter_initial},
                  {"perimeter_final", s.perimeter_final},
                  {"max_volume_drift", s.max_volume_drift},
                  {"dissipation_sum", s.dissipation_sum},
                  {"perimeter_drop", s.perimeter_initial - s.perimeter_final},
                  {"max_constraint_margin", s.max_constraint_margin},
                  {"max_el_residual", s.max_el_residual},
                  {"perimeter_monotone", s.perimeter_monotone}};
  j["diagnostics_digest"] = m.diagnostics_digest;
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

}  // namespace flatflow
