#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "flatflow/geometry.hpp"

namespace flatflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw GeometryError("invalid shape parameters: " + what);
}

double legendre_max(int l, int m) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find({l, m}); it != cache.end()) return it->second;
  double best = 0.0;
  constexpr int samples = 20001;
  for (int i = 0; i < samples; ++i) {
    const double x = -1.0 + 2.0 * i / (samples - 1);
    best = std::max(best, std::abs(std::assoc_legendre(static_cast<unsigned>(l),
                                                       static_cast<unsigned>(m), x)));
  }
  cache[{l, m}] = best;
  return best;
}

}  // namespace

double spherical_harmonic(int l, int m, const Vec3& direction) {
  const Vec3 d = direction.normalized();
  const double phi = std::atan2(d.y(), d.x());
  const double p = std::assoc_legendre(static_cast<unsigned>(l), static_cast<unsigned>(m),
                                       std::clamp(d.z(), -1.0, 1.0));
  return p * std::cos(m * phi) / legendre_max(l, m);
}

DiscreteSurface sample_closed_curve(const std::function<Vec2(double)>& param, int n,
                                    GeometryOptions options) {
  // Cumulative chord length on a fine parameter grid, then inverse
  // interpolation of equally spaced arc-length targets.
  const int fine = std::max(64 * n, 20000);
  std::vector<double> s(static_cast<std::size_t>(fine) + 1, 0.0);
  Vec2 prev = param(0.0);
  for (int i = 1; i <= fine; ++i) {
    const Vec2 p = param(kTwoPi * i / fine);
    s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i) - 1] + (p - prev).norm();
    prev = p;
  }
  const double total = s.back();
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(n));
  std::size_t k = 0;
  for (int j = 0; j < n; ++j) {
    const double target = total * j / n;
    while (k + 1 < s.size() && s[k + 1] < target) ++k;
    const double frac = s[k + 1] > s[k] ? (target - s[k]) / (s[k + 1] - s[k]) : 0.0;
    pts.push_back(param(kTwoPi * (static_cast<double>(k) + frac) / fine));
  }
  return DiscreteSurface::from_curves({pts}, options);
}

DiscreteSurface icosphere(double R, int subdiv, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int level = 0; level < subdiv; ++level) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid[key] = id;
      return id;
    };
    std::vector<Triangle> nf;
    nf.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int a = midpoint(tri[0], tri[1]);
      const int b = midpoint(tri[1], tri[2]);
      const int c = midpoint(tri[2], tri[0]);
      nf.push_back({tri[0], a, c});
      nf.push_back({tri[1], b, a});
      nf.push_back({tri[2], c, b});
      nf.push_back({a, b, c});
    }
    f = std::move(nf);
  }
  for (auto& p : v) p = center + R * p;
  return DiscreteSurface::from_mesh(std::move(v), std::move(f));
}

DiscreteSurface build_shape(const ShapeSpec& spec, GeometryOptions options) {
  switch (spec.kind) {
    case ShapeKind::Circle: {
      require(spec.R > 0.0, "R must be positive");
      require(spec.n >= 8, "n must be at least 8");
      std::vector<Vec2> pts;
      for (int j = 0; j < spec.n; ++j) {
        const double th = kTwoPi * j / spec.n;
        pts.emplace_back(spec.center.x() + spec.R * std::cos(th),
                         spec.center.y() + spec.R * std::sin(th));
      }
      return DiscreteSurface::from_curves({pts}, options);
    }
    case ShapeKind::Ellipse: {
      require(spec.a > 0.0 && spec.b > 0.0, "semi-axes must be positive");
      require(spec.n >= 8, "n must be at least 8");
      const Vec2 c = spec.center.head<2>();
      return sample_closed_curve(
          [&](double t) { return Vec2(c.x() + spec.a * std::cos(t), c.y() + spec.b * std::sin(t)); },
          spec.n, options);
    }
    case ShapeKind::PerturbedCircle: {
      require(spec.R > 0.0, "R must be positive");
      require(spec.n >= 8, "n must be at least 8");
      require(spec.mode >= 0, "mode must be non-negative");
      require(std::abs(spec.amplitude) < spec.R, "amplitude must be below R");
      const Vec2 c = spec.center.head<2>();
      return sample_closed_curve(
          [&](double t) {
            const double r = spec.R + spec.amplitude * std::cos(spec.mode * t);
            return Vec2(c.x() + r * std::cos(t), c.y() + r * std::sin(t));
          },
          spec.n, options);
    }
    case ShapeKind::Sphere:
      require(spec.R > 0.0, "R must be positive");
      require(spec.subdiv >= 1, "subdiv must be at least 1");
      return icosphere(spec.R, spec.subdiv, spec.center);
    case ShapeKind::PerturbedSphere: {
      require(spec.R > 0.0, "R must be positive");
      require(spec.subdiv >= 1, "subdiv must be at least 1");
      require(spec.mode >= 0 && spec.order >= 0 && spec.order <= spec.mode,
              "need 0 <= m <= l");
      require(std::abs(spec.amplitude) < spec.R, "amplitude must be below R");
      const DiscreteSurface base = icosphere(1.0, spec.subdiv);
      std::vector<Vec3> pos = base.positions();
      for (auto& p : pos)
        p = spec.center + (spec.R + spec.amplitude * spherical_harmonic(spec.mode, spec.order, p)) * p;
      return base.with_positions(std::move(pos));
    }
    case ShapeKind::File:
      return load_surface(spec.path, options);
  }
  throw GeometryError("unknown shape kind");
}

}  // namespace flatflow
