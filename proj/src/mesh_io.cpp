#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flatflow/geometry.hpp"

namespace flatflow {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GeometryError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GeometryError("cannot write " + path);
  out << text;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(), ::tolower);
  return tail == suffix;
}

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Skips '#' comments in OFF files.
class OffTokens {
 public:
  explicit OffTokens(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(tok);
    }
  }
  std::string next() {
    if (pos_ >= tokens_.size()) throw GeometryError("OFF: unexpected end of file");
    return tokens_[pos_++];
  }
  long next_int() { return std::stol(next()); }
  double next_double() { return std::stod(next()); }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

DiscreteSurface load_off(const std::string& path, GeometryOptions options) {
  OffTokens tok(read_file(path));
  if (tok.next() != "OFF") throw GeometryError("OFF: missing header in " + path);
  const long nv = tok.next_int(), nf = tok.next_int();
  tok.next_int();
  if (nv <= 0 || nf <= 0) throw GeometryError("OFF: bad counts in " + path);
  std::vector<Vec3> v(static_cast<std::size_t>(nv));
  for (auto& p : v) {
    p.x() = tok.next_double();
    p.y() = tok.next_double();
    p.z() = tok.next_double();
  }
  std::vector<Triangle> f(static_cast<std::size_t>(nf));
  for (auto& t : f) {
    if (tok.next_int() != 3) throw GeometryError("OFF: only triangles are supported");
    for (auto& i : t) i = static_cast<int>(tok.next_int());
  }
  return DiscreteSurface::from_mesh(std::move(v), std::move(f), options);
}

DiscreteSurface load_obj(const std::string& path, GeometryOptions options) {
  std::istringstream in(read_file(path));
  std::vector<Vec3> v;
  std::vector<Triangle> f;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "v") {
      Vec3 p;
      ls >> p.x() >> p.y() >> p.z();
      v.push_back(p);
    } else if (kind == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const int i = std::stoi(tok.substr(0, tok.find('/')));
        idx.push_back(i < 0 ? static_cast<int>(v.size()) + i : i - 1);
      }
      if (idx.size() != 3) throw GeometryError("OBJ: only triangles are supported");
      f.push_back({idx[0], idx[1], idx[2]});
    }
  }
  return DiscreteSurface::from_mesh(std::move(v), std::move(f), options);
}

DiscreteSurface parse_curve_json(const std::string& text, GeometryOptions options) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(std::string("curve JSON: ") + e.what());
  }
  if (!j.is_array()) throw GeometryError("curve JSON: expected an array of components");
  std::vector<std::vector<Vec2>> comps;
  for (const auto& c : j) {
    if (!c.is_array()) throw GeometryError("curve JSON: component must be an array");
    std::vector<Vec2> pts;
    for (const auto& p : c) {
      if (!p.is_array() || p.size() != 2) throw GeometryError("curve JSON: point must be [x, y]");
      pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    comps.push_back(std::move(pts));
  }
  return DiscreteSurface::from_curves(comps, options);
}

DiscreteSurface load_curve_json(const std::string& path, GeometryOptions options) {
  return parse_curve_json(read_file(path), options);
}

DiscreteSurface load_surface(const std::string& path, GeometryOptions options) {
  if (ends_with(path, ".off")) return load_off(path, options);
  if (ends_with(path, ".obj")) return load_obj(path, options);
  if (ends_with(path, ".json")) return load_curve_json(path, options);
  throw GeometryError("unrecognised surface file extension: " + path);
}

std::string curve_json(const DiscreteSurface& s) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& comp : s.curve_components()) {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& p : comp) c.push_back({p.x(), p.y()});
    j.push_back(std::move(c));
  }
  return j.dump();
}

std::string off_text(const DiscreteSurface& s) {
  if (s.is_curve()) throw GeometryError("OFF output requires a mesh");
  std::string out = "OFF\n" + std::to_string(s.vertex_count()) + " " +
                    std::to_string(s.triangles().size()) + " 0\n";
  for (const auto& p : s.positions())
    out += fmt17(p.x()) + " " + fmt17(p.y()) + " " + fmt17(p.z()) + "\n";
  for (const auto& t : s.triangles())
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  return out;
}

void save_off(const DiscreteSurface& s, const std::string& path) { write_file(path, off_text(s)); }

void save_curve_json(const DiscreteSurface& s, const std::string& path) {
  write_file(path, curve_json(s));
}

}  // namespace flatflow
