#include <doctest.h>

#include <cstring>

#include "flatflow/kernels.hpp"
#include "support.hpp"

using namespace testing;
namespace k = flatflow::kernels;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const Vec3& a, const Vec3& b) {
  return same_bits(a.x(), b.x()) && same_bits(a.y(), b.y()) && same_bits(a.z(), b.z());
}

DiscreteSurface bumpy_sphere() {
  ShapeSpec spec;
  spec.kind = ShapeKind::PerturbedSphere;
  spec.subdiv = 4;
  spec.mode = 3;
  spec.order = 2;
  spec.amplitude = 0.1;
  return build_shape(spec);
}

}  // namespace

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  const DiscreteSurface s = bumpy_sphere();
  const std::vector<Vec3> normals = area_normals(s);
  const auto q0 = k::serial::fit_quadrics(s, normals);
  const auto r0 = k::serial::tangent_ball_radii(s, normals, 1.0);
  const auto c0 = k::serial::cotangents(s);
  for (int threads : {1, 2, 3, 8}) {
    CAPTURE(threads);
    k::configure_threads(threads);
    const auto q = k::parallel::fit_quadrics(s, normals);
    const auto r = k::parallel::tangent_ball_radii(s, normals, 1.0);
    const auto c = k::parallel::cotangents(s);
    REQUIRE(q.size() == q0.size());
    REQUIRE(r.size() == r0.size());
    REQUIRE(c.size() == c0.size());
    bool ok = true;
    for (std::size_t i = 0; i < q.size(); ++i)
      ok = ok && q[i].ok == q0[i].ok && same_bits(q[i].k1, q0[i].k1) && same_bits(q[i].k2, q0[i].k2) &&
           same_bits(q[i].normal, q0[i].normal) && same_bits(q[i].dir1, q0[i].dir1);
    for (std::size_t i = 0; i < r.size(); ++i) ok = ok && same_bits(r[i], r0[i]);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (int j = 0; j < 3; ++j) ok = ok && same_bits(c[i][j], c0[i][j]);
    CHECK(ok);
  }
  k::configure_threads();
}

TEST_CASE("quadric fit on a sphere") {
  const DiscreteSurface s = icosphere(2.0, 4);
  const auto q = k::serial::fit_quadrics(s, area_normals(s));
  for (std::size_t v = 0; v < q.size(); ++v) {
    REQUIRE(q[v].ok);
    CHECK(q[v].k1 == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(q[v].k2 == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(q[v].normal.dot(s.position(static_cast<int>(v)).normalized()) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("cotangents of an equilateral triangle") {
  const DiscreteSurface s = icosphere(1.0, 0);
  const auto c = k::serial::cotangents(s);
  // Equilateral faces.
  for (const auto& f : c)
    for (double x : f) CHECK(x == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("tangent ball radius of a sphere is its radius") {
  const DiscreteSurface s = icosphere(1.5, 3);
  std::vector<Vec3> radial;
  for (const auto& p : s.positions()) radial.push_back(p.normalized());
  for (double x : k::serial::tangent_ball_radii(s, radial, 10.0)) CHECK(x == doctest::Approx(1.5).epsilon(1e-12));
  // Discrete normals tilt slightly; the ball can only shrink.
  for (double x : k::serial::tangent_ball_radii(s, area_normals(s), 10.0)) {
    CHECK(x <= 1.5 * (1 + 1e-12));
    CHECK(x >= 1.3);
  }
  // Nothing within a tiny search radius.
  for (double x : k::serial::tangent_ball_radii(s, radial, 1e-3)) CHECK(std::isinf(x));
}
