#include <doctest.h>

#include <random>

#include "flatflow/error.hpp"
#include "flatflow/laplace_beltrami.hpp"
#include "flatflow/normal_graph.hpp"
#include "support.hpp"

using namespace testing;

TEST_CASE("xi_from_height") {
  const DiscreteSurface s = sphere(4);
  const CurvatureData c = compute_curvature(s);
  const int n = s.vertex_count();
  CHECK(max_abs(xi_from_height(c, HeightField::Zero(n))) == 0.0);

  // Pointwise closed form with the surface's own H and K.
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  HeightField psi(n);
  for (int v = 0; v < n; ++v) psi(v) = u(rng);
  const SurfaceField xi = xi_from_height(c, psi);
  for (int v = 0; v < n; ++v) {
    const double p = psi(v);
    CHECK(std::abs(xi(v) - (p + c.H(v) / 2 * p * p + c.K(v) / 3 * p * p * p)) <= 1e-12 * std::abs(p));
  }

  // Concentric spheres: xi = eps + eps^2 + eps^3/3, and 4 pi times that is the shell volume.
  for (double eps : {0.01, 0.1}) {
    const double shell = 4.0 * std::numbers::pi / 3.0 * (std::pow(1 + eps, 3) - 1.0);
    CHECK(4.0 * std::numbers::pi * (eps + eps * eps + eps * eps * eps / 3) == doctest::Approx(shell).epsilon(1e-14));
    const SurfaceField x = xi_from_height(c, HeightField::Constant(n, eps));
    CHECK(max_abs(x.array() - (eps + eps * eps + eps * eps * eps / 3)) <= 2e-2 * eps * eps);
    CHECK(xi_volume(s, c, HeightField::Constant(n, eps))[0] ==
          doctest::Approx(measure(graph_surface(s, c, HeightField::Constant(n, eps))).volume[0] -
                          measure(s).volume[0])
              .epsilon(1e-10));
  }

  // Concentric circles: xi = eps + eps^2/2, integral pi((1+eps)^2 - 1).
  const DiscreteSurface ci = circle(512);
  const CurvatureData cc = compute_curvature(ci);
  const double eps = 0.05;
  const SurfaceField x = xi_from_height(cc, HeightField::Constant(ci.vertex_count(), eps));
  CHECK(max_abs(x.array() - (eps + eps * eps / 2)) <= 1e-12);
  const double integral = (vertex_measure(ci).array() * x.array()).sum();
  CHECK(integral == doctest::Approx(std::numbers::pi * ((1 + eps) * (1 + eps) - 1)).epsilon(1e-4));

  CHECK_THROWS_AS(xi_from_height(cc, HeightField::Constant(ci.vertex_count(), 0.5), 0.4), GraphError);
}

TEST_CASE("xi_derivative matches a finite difference") {
  const DiscreteSurface s = sphere(3);
  const CurvatureData c = compute_curvature(s);
  HeightField psi(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) psi(v) = 0.05 * s.position(v).x();
  const double h = 1e-6;
  const SurfaceField fd = (xi_from_height(c, psi.array() + h) - xi_from_height(c, psi.array() - h)) / (2 * h);
  CHECK(max_abs(fd - xi_derivative(c, psi)) <= 1e-8);
}

TEST_CASE("graph_surface") {
  const DiscreteSurface ci = circle(256);
  const CurvatureData cc = compute_curvature(ci);
  const DiscreteSurface same = graph_surface(ci, cc, HeightField::Zero(256));
  for (int v = 0; v < 256; ++v) CHECK(same.position(v) == ci.position(v));
  const DiscreteSurface big = graph_surface(ci, cc, HeightField::Constant(256, 0.05));
  for (int v = 0; v < 256; ++v) CHECK(std::abs(big.position(v).norm() - 1.05) <= 1e-12);

  // First variation of the volume is the integral of psi, which vanishes for
  // psi = z; the second is the integral of (H/2) psi^2 = 4 pi / 3 eps^2.
  const DiscreteSurface s = sphere(4);
  const CurvatureData c = compute_curvature(s);
  HeightField z(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) z(v) = s.position(v).z();
  const double v0 = measure(s).volume[0];
  for (double eps : {0.02, 0.01}) {
    const double dv = measure(graph_surface(s, c, eps * z)).volume[0] - v0;
    CHECK(dv / (eps * eps) == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-2));
  }
}

TEST_CASE("graph_surface detects folds") {
  const DiscreteSurface ci = circle(64);
  const CurvatureData cc = compute_curvature(ci);
  HeightField psi = HeightField::Zero(64);
  psi.head(32).setConstant(-1.2);  // half the circle pushed through the centre
  try {
    graph_surface(ci, cc, psi);
    FAIL("fold not detected");
  } catch (const GraphError& e) {
    CHECK(!e.vertices().empty());
  }
  CHECK_THROWS_AS(graph_surface(ci, cc, HeightField::Constant(64, -1.0)), Error);
}

TEST_CASE("graph_jacobian") {
  const DiscreteSurface s = sphere(4);
  const CurvatureData c = compute_curvature(s);
  const int n = s.vertex_count();
  CHECK(max_abs(graph_jacobian(s, c, HeightField::Zero(n)).array() - 1.0) <= 1e-12);
  const double eps = 0.05;
  // (1 + k1 eps)(1 + k2 eps) with the fitted curvatures, (1 + eps)^2 up to the fit error.
  const SurfaceField J = graph_jacobian(s, c, HeightField::Constant(n, eps));
  CHECK(max_abs(J.array() - (1 + eps) * (1 + eps)) <= 2e-2 * eps);
  CHECK(J.minCoeff() > 0.0);

  const DiscreteSurface ci = circle(256);
  const CurvatureData cc = compute_curvature(ci);
  CHECK(max_abs(graph_jacobian(ci, cc, HeightField::Constant(256, eps)).array() - (1 + eps)) <= 1e-3 * eps);
}

TEST_CASE("mean_curvature_of_graph") {
  const DiscreteSurface s = sphere(4);
  const CurvatureData c = compute_curvature(s);
  const Hm1Solver solver = assemble(s);
  const int n = s.vertex_count();

  const GraphGeometry zero = mean_curvature_of_graph(s, c, solver, HeightField::Zero(n));
  CHECK(max_abs(zero.H_graph - c.H_area) <= 1e-12);
  CHECK(max_abs(zero.R0) == 0.0);
  CHECK(max_abs(zero.xi) == 0.0);

  for (double eps : {0.01, 0.05, 0.1}) {
    const GraphGeometry g = mean_curvature_of_graph(s, c, solver, HeightField::Constant(n, eps));
    CHECK(max_abs(g.H_graph.array() - 2.0 / (1 + eps)) <= 1e-4);
    CHECK(max_abs(g.R0.array() - (2.0 / (1 + eps) - 2.0)) <= 1e-4);
    CHECK(max_abs(g.R0 - (g.H_graph - g.H_linear)) <= 1e-14);
  }

  const DiscreteSurface ci = circle(256);
  const CurvatureData cc = compute_curvature(ci);
  const GraphGeometry gc = mean_curvature_of_graph(ci, cc, assemble(ci), HeightField::Constant(256, 0.05));
  CHECK(max_abs(gc.H_graph.array() - 1.0 / 1.05) <= 1e-12);
}

TEST_CASE("R0 is smooth in the amplitude") {
  const DiscreteSurface ci = circle(512);
  const CurvatureData cc = compute_curvature(ci);
  const Hm1Solver solver = assemble(ci);
  const HeightField phi = on_angles(ci, [](double t) { return std::cos(3 * t); });
  const auto r0 = [&](double s) { return mean_curvature_of_graph(ci, cc, solver, s * phi).R0; };
  const SurfaceField slope = (r0(1e-5) - r0(-1e-5)) / 2e-5;
  const auto dev = [&](double s) {
    const SurfaceField d = r0(s) - s * slope;
    return std::sqrt(solver.inner(d, d));
  };
  const double f = dev(0.02) / dev(0.01);
  CHECK(f == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("height_between") {
  const DiscreteSurface ci = circle(256);
  const CurvatureData cc = compute_curvature(ci);
  CHECK(max_abs(height_between(ci, cc, ci)) <= 1e-12);
  CHECK(max_abs(height_between(ci, cc, circle(256, 1.05)).array() - 0.05) <= 1e-10);
  // A target sampled differently: the gap up to its chord sag.
  CHECK(max_abs(height_between(ci, cc, circle(300, 1.05)).array() - 0.05) <= 1e-3);

  const HeightField psi = on_angles(ci, [](double t) { return 0.01 * std::cos(2 * t); });
  const DiscreteSurface target = graph_surface(ci, cc, psi);
  CHECK(max_abs(height_between(ci, cc, target) - psi) <= 1e-6);

  const DiscreteSurface s = sphere(3);
  const CurvatureData c = compute_curvature(s);
  HeightField ps(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) ps(v) = 0.02 * s.position(v).z() * s.position(v).x();
  CHECK(max_abs(height_between(s, c, graph_surface(s, c, ps)) - ps) <= 1e-10);

  CHECK_THROWS_AS(height_between(ci, cc, circle(256, 3.0), 0.5), GraphError);
}

TEST_CASE("tangential_gradient of a linear function on the sphere") {
  const DiscreteSurface s = sphere(4);
  SurfaceField z(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) z(v) = s.position(v).z();
  const auto g = tangential_gradient(s, z);
  for (int v = 0; v < s.vertex_count(); ++v) {
    const Vec3 p = s.position(v).normalized();
    const Vec3 exact = Vec3::UnitZ() - p.z() * p;
    CHECK((g[v] - exact).norm() <= 2e-2);
  }
}
