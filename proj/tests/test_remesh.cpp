#include <doctest.h>

#include "flatflow/remesh.hpp"
#include "support.hpp"

using namespace testing;

namespace {

DiscreteSurface crowded_circle(int n) {
  // Vertices bunched towards theta = 0.
  std::vector<Vec2> p;
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double t = 2.0 * std::numbers::pi * (s + 0.12 * std::sin(2.0 * std::numbers::pi * s));
    p.emplace_back(std::cos(t), std::sin(t));
  }
  return DiscreteSurface::from_curves({p});
}

}  // namespace

TEST_CASE("arc-length resampling") {
  const DiscreteSurface c = crowded_circle(200);
  CHECK(mesh_quality(c).edge_ratio > 1.5);
  RemeshOptions o;
  CHECK(needs_remesh(c, o));
  const DiscreteSurface r = resample_arc_length(c);
  CHECK(r.vertex_count() == 200);
  CHECK(mesh_quality(r).edge_ratio <= 1.0 + 1e-6);
  for (const auto& p : r.positions()) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-6));

  bool changed = false;
  const DiscreteSurface m = remesh(c, o, &changed);
  CHECK(changed);
  CHECK(measure(m).volume[0] == doctest::Approx(measure(c).volume[0]).epsilon(1e-12));

  o.policy = RemeshPolicy::Off;
  remesh(c, o, &changed);
  CHECK(!changed);
}

TEST_CASE("uniform meshes are left alone") {
  bool changed = true;
  const DiscreteSurface c = circle(128);
  remesh(c, {}, &changed);
  CHECK(!changed);
  const DiscreteSurface s = sphere(3);
  CHECK(mesh_quality(s).min_angle_deg > 40.0);
  remesh(s, {}, &changed);
  CHECK(!changed);
}

TEST_CASE("restore_volume") {
  const DiscreteSurface s = sphere(3);
  const double v = measure(s).volume[0];
  const DiscreteSurface r = restore_volume(s, {1.1 * v});
  CHECK(measure(r).volume[0] == doctest::Approx(1.1 * v).epsilon(1e-12));
}

TEST_CASE("mesh improvement keeps a sphere on the sphere") {
  const DiscreteSurface s = sphere(3);
  const DiscreteSurface m = improve_mesh(s, 3);
  CHECK(m.vertex_count() == s.vertex_count());
  CHECK(mesh_quality(m).min_angle_deg >= mesh_quality(s).min_angle_deg - 1.0);
}
