#include <doctest.h>

#include <json.hpp>

#include "flatflow/oracles.hpp"
#include "support.hpp"

using namespace testing;

TEST_CASE("linear_rate") {
  CHECK(linear_rate(RoundShape::Circle, 1.0, 1) == 0.0);
  CHECK(linear_rate(RoundShape::Circle, 1.0, 2) == -12.0);
  CHECK(linear_rate(RoundShape::Circle, 1.0, 3) == -72.0);
  CHECK(linear_rate(RoundShape::Sphere, 1.0, 1) == 0.0);
  CHECK(linear_rate(RoundShape::Sphere, 1.0, 2) == -24.0);
  // Rates carry 1 / R^4.
  CHECK(linear_rate(RoundShape::Circle, 2.0, 2) == doctest::Approx(-12.0 / 16.0));
  CHECK(linear_rate(RoundShape::Sphere, 0.5, 3) == doctest::Approx(-12.0 * 10.0 * 16.0));
  CHECK_THROWS(linear_rate(RoundShape::Circle, 1.0, -1));
}

TEST_CASE("spectral_reference_curve") {
  using C = std::complex<double>;
  const auto zero = spectral_reference_curve(std::vector<C>(4, 0.0), 1.0, 0.3);
  for (const auto& z : zero) CHECK(std::abs(z) == 0.0);
  const auto u = spectral_reference_curve({0.0, 0.01, 0.01}, 1.0, 0.05);
  CHECK(u[1].real() == 0.01);
  CHECK(u[2].real() == doctest::Approx(0.01 * std::exp(-0.6)).epsilon(1e-14));
  CHECK(spectral_reference_curve({0.0, 0.01}, 1.0, 123.0)[1].real() == 0.01);
}

TEST_CASE("stationarity_check") {
  CHECK(stationarity_check(sphere(4)) <= 5e-2);
  CHECK(stationarity_check(circle(256)) <= 1e-4);
  CHECK(stationarity_check(ellipse(2.0, 1.0, 256)) >= 0.1);
}

TEST_CASE("coefficient projections") {
  const DiscreteSurface c = perturbed_circle(512, 0.03, 3);
  const Vec3 o = centroid(c);
  CHECK(o.norm() <= 1e-12);
  const auto a = fourier_coefficient(c, radial_field(c, o), 3, o);
  CHECK(a.real() == doctest::Approx(0.03).epsilon(1e-3));
  CHECK(std::abs(a.imag()) <= 1e-12);
  CHECK(std::abs(fourier_coefficient(c, radial_field(c, o), 2, o)) <= 1e-4);

  ShapeSpec spec;
  spec.kind = ShapeKind::PerturbedSphere;
  spec.subdiv = 4;
  spec.mode = 2;
  spec.amplitude = 0.02;
  const DiscreteSurface s = build_shape(spec);
  const Vec3 cs = centroid(s);
  CHECK(harmonic_coefficient(s, radial_field(s, cs), 2, 0, cs) == doctest::Approx(0.02).epsilon(1e-2));
}

TEST_CASE("fit_decay_rate recovers an exponential") {
  std::vector<double> t, a;
  for (int i = 0; i < 20; ++i) {
    t.push_back(0.01 * i);
    a.push_back(-0.3 * std::exp(-7.5 * t.back()));
  }
  CHECK(fit_decay_rate(t, a) == doctest::Approx(-7.5).epsilon(1e-12));
  CHECK_THROWS(fit_decay_rate({0.0}, {1.0}));
}

TEST_CASE("discrete step reproduces the linearized rates") {
  const RateCheck k2 = verify_rate(RoundShape::Circle, 2, 1.0, 512, 1e-3, 0.01);
  CHECK(k2.pass);
  CHECK(k2.extrapolated == doctest::Approx(-12.0).epsilon(0.01));
  CHECK(k2.rates.size() == 3);
  const RateCheck k1 = verify_rate(RoundShape::Circle, 1, 1.0, 512, 1e-3, 0.05);
  CHECK(std::abs(k1.extrapolated) <= 0.05);
  const RateCheck l2 = verify_rate(RoundShape::Sphere, 2, 1.0, 4, 1e-3, 0.05);
  CHECK(l2.extrapolated == doctest::Approx(-24.0).epsilon(0.05));

  const auto j = nlohmann::json::parse(rate_report_json({k2, l2}));
  REQUIRE(j.size() == 2);
  CHECK(j[0]["shape"] == "circle");
  CHECK(j[1]["mode"] == 2);
  CHECK(j[0]["pass"] == true);
}
