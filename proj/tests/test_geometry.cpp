#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "flatflow/error.hpp"
#include "support.hpp"

using namespace testing;

TEST_CASE("build_shape: circle and sphere") {
  const DiscreteSurface c = circle(256);
  CHECK(c.is_curve());
  CHECK(c.vertex_count() == 256);
  CHECK(c.component_count() == 1);
  for (int v = 0; v < c.vertex_count(); ++v) {
    CHECK(c.next(c.prev(v)) == v);
    CHECK(c.position(v).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  const DiscreteSurface s = sphere(3);
  CHECK(!s.is_curve());
  CHECK(s.vertex_count() == 642);
  CHECK(s.triangles().size() == 1280u);
  CHECK(s.component_count() == 1);
  CHECK(measure(s).volume[0] > 0.0);
}

TEST_CASE("a mesh file with a boundary edge is rejected") {
  const auto path = std::filesystem::temp_directory_path() / "flatflow_open_tetra.off";
  {
    std::ofstream out(path);
    out << "OFF\n4 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n";
  }
  try {
    load_surface(path.string());
    FAIL("open mesh accepted");
  } catch (const GeometryError& e) {
    CHECK(std::string(e.what()).find("not closed") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("orientation is repaired to positive volume") {
  std::vector<Vec2> cw;
  for (int i = 0; i < 64; ++i) {
    const double t = -2.0 * std::numbers::pi * i / 64;
    cw.emplace_back(std::cos(t), std::sin(t));
  }
  const DiscreteSurface c = DiscreteSurface::from_curves({cw});
  CHECK(measure(c).volume[0] > 0.0);
  const auto n = compute_curvature(c).normal;
  for (int v = 0; v < c.vertex_count(); ++v) CHECK(n[v].dot(c.position(v)) > 0.0);
}

TEST_CASE("compute_curvature: circle, sphere, ellipse tip") {
  const CurvatureData cc = compute_curvature(circle(256));
  CHECK(max_abs(cc.kappa.array() - 1.0) <= 1e-3);
  CHECK(max_abs(cc.H - cc.kappa) == 0.0);

  const DiscreteSurface s = sphere(4);
  const CurvatureData cs = compute_curvature(s);
  CHECK(max_abs(cs.H.array() - 2.0) <= 2e-2);
  CHECK(max_abs(cs.K.array() - 1.0) <= 5e-2);
  for (int v = 0; v < s.vertex_count(); ++v) {
    CHECK(cs.normal[v].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cs.H(v) == doctest::Approx(cs.k1(v) + cs.k2(v)).epsilon(1e-12));
    CHECK(cs.K(v) == doctest::Approx(cs.k1(v) * cs.k2(v)).epsilon(1e-12));
    CHECK((cs.B[v] - cs.B[v].transpose()).norm() <= 1e-12);
    CHECK((cs.B[v] * cs.normal[v]).norm() <= 1e-10);
  }

  // kappa(t) = ab / (a^2 sin^2 t + b^2 cos^2 t)^{3/2}; at t = 0 it is a / b^2.
  const double a = 2.0, b = 1.0;
  const DiscreteSurface e = ellipse(a, b, 1024);
  int tip = 0;
  for (int v = 0; v < e.vertex_count(); ++v)
    if ((e.position(v) - Vec3(a, 0, 0)).norm() < (e.position(tip) - Vec3(a, 0, 0)).norm()) tip = v;
  CHECK(compute_curvature(e).kappa(tip) == doctest::Approx(a / (b * b)).epsilon(1e-2 / 2.0));
}

TEST_CASE("measure: circle, sphere, two circles") {
  const Measure c = measure(circle(256));
  CHECK(std::abs(c.perimeter - 2.0 * std::numbers::pi) <= 1e-3);
  CHECK(std::abs(c.volume[0] - std::numbers::pi) <= 1e-3);

  const Measure s = measure(sphere(4));
  CHECK(std::abs(s.perimeter - 4.0 * std::numbers::pi) <= 2e-2);
  CHECK(std::abs(s.volume[0] - 4.0 * std::numbers::pi / 3.0) <= 1e-2);

  std::vector<Vec2> a, b;
  for (int i = 0; i < 512; ++i) {
    const double t = 2.0 * std::numbers::pi * i / 512;
    a.emplace_back(std::cos(t), std::sin(t));
    b.emplace_back(3.0 + std::cos(t), std::sin(t));
  }
  const DiscreteSurface two = DiscreteSurface::from_curves({a, b});
  CHECK(two.component_count() == 2);
  const Measure m = measure(two);
  CHECK(m.perimeter == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-4));
  REQUIRE(m.volume.size() == 2);
  CHECK(m.volume[0] == doctest::Approx(std::numbers::pi).epsilon(1e-4));
  CHECK(m.volume[1] == doctest::Approx(m.volume[0]).epsilon(1e-12));
}

TEST_CASE("vertex_measure sums to the perimeter") {
  for (const auto& s : {circle(100), sphere(3), ellipse(1.3, 0.7, 200)})
    CHECK(vertex_measure(s).sum() == doctest::Approx(measure(s).perimeter).epsilon(1e-12));
}

TEST_CASE("mean_curvature_normal on round shapes") {
  CHECK(max_abs(mean_curvature_normal(sphere(4)).array() - 2.0) <= 5e-5);
  // Regular polygon: 2 sin(pi/n) / chord = 1 / R.
  CHECK(max_abs(mean_curvature_normal(circle(64, 2.0)).array() - 0.5) <= 1e-12);
}

TEST_CASE("estimate_ubc_radius") {
  const DiscreteSurface s = sphere(4);
  CHECK(estimate_ubc_radius(s, compute_curvature(s)) == doctest::Approx(1.0).epsilon(0.05));

  const DiscreteSurface e = ellipse(2.0, 1.0, 512);
  CHECK(estimate_ubc_radius(e, compute_curvature(e)) == doctest::Approx(0.5).epsilon(0.05));

  // Two unit spheres, gap 0.2.
  const DiscreteSurface one = sphere(3);
  std::vector<Vec3> pts = one.positions();
  std::vector<Triangle> tris = one.triangles();
  const int n = one.vertex_count();
  for (int v = 0; v < n; ++v) pts.push_back(one.position(v) + Vec3(2.2, 0, 0));
  for (const auto& t : one.triangles()) tris.push_back({t[0] + n, t[1] + n, t[2] + n});
  const DiscreteSurface pair = DiscreteSurface::from_mesh(pts, tris);
  CHECK(pair.component_count() == 2);
  CHECK(estimate_ubc_radius(pair, compute_curvature(pair)) <= 0.1 + 1e-3);
}

TEST_CASE("offset_points") {
  const DiscreteSurface c = circle(256);
  const CurvatureData cc = compute_curvature(c);
  for (const auto& p : offset_points(c, cc, 0.1).points) CHECK(std::abs(p.norm() - 1.1) <= 1e-6);
  const OffsetResult same = offset_points(c, cc, 0.0);
  for (int v = 0; v < c.vertex_count(); ++v) CHECK(same.points[v] == c.position(v));

  const DiscreteSurface s = sphere(4);
  const OffsetResult in = offset_points(s, compute_curvature(s), -0.5);
  CHECK(in.within_ubc);
  for (const auto& p : in.points) CHECK(std::abs(p.norm() - 0.5) <= 1e-6);
  CHECK(!offset_points(s, compute_curvature(s), -1.5).within_ubc);
}

TEST_CASE("offset_volume_weights integrate to the concentric shell volume") {
  const DiscreteSurface s = sphere(3);
  const auto normals = area_normals(s);
  const auto w = offset_volume_weights(s, normals);
  const double t = 0.07;
  double vol = 0.0;
  for (const auto& c : w) vol += c[0] * t + c[1] * t * t / 2.0 + c[2] * t * t * t / 3.0;
  std::vector<Vec3> moved = s.positions();
  for (int v = 0; v < s.vertex_count(); ++v) moved[v] += t * normals[v];
  const double exact = measure(s.with_positions(moved)).volume[0] - measure(s).volume[0];
  CHECK(vol == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("perimeter and volume gradients match finite differences") {
  const DiscreteSurface s = sphere(2);
  const auto gp = perimeter_gradient(s);
  const auto gv = volume_gradient(s);
  const double h = 1e-6;
  for (int v : {0, 17, 100}) {
    for (int d = 0; d < 3; ++d) {
      std::vector<Vec3> plus = s.positions(), minus = s.positions();
      plus[v](d) += h;
      minus[v](d) -= h;
      const Measure mp = measure(s.with_positions(plus)), mm = measure(s.with_positions(minus));
      CHECK((mp.perimeter - mm.perimeter) / (2 * h) == doctest::Approx(gp[v](d)).epsilon(1e-6));
      CHECK((mp.volume[0] - mm.volume[0]) / (2 * h) == doctest::Approx(gv[v](d)).epsilon(1e-6));
    }
  }
}

TEST_CASE("degenerate input is rejected") {
  std::vector<Vec2> pts = {{0, 0}, {1, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(DiscreteSurface::from_curves({pts}), GeometryError);
  CHECK_THROWS_AS(DiscreteSurface::from_curves({{{0, 0}, {1, 0}}}), GeometryError);
}

TEST_CASE("file formats round-trip") {
  const auto dir = std::filesystem::temp_directory_path();
  const DiscreteSurface s = sphere(2);
  save_off(s, (dir / "flatflow_rt.off").string());
  const DiscreteSurface s2 = load_surface((dir / "flatflow_rt.off").string());
  REQUIRE(s2.vertex_count() == s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) CHECK(s2.position(v) == s.position(v));

  const DiscreteSurface e = ellipse(1.5, 0.5, 64);
  const DiscreteSurface e2 = parse_curve_json(curve_json(e));
  REQUIRE(e2.vertex_count() == e.vertex_count());
  for (int v = 0; v < e.vertex_count(); ++v) CHECK(e2.position(v) == e.position(v));
  std::filesystem::remove(dir / "flatflow_rt.off");
}
