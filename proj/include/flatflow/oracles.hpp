#pragma once

#include <complex>
#include <string>
#include <vector>

#include "flatflow/geometry.hpp"

namespace flatflow {

enum class RoundShape { Circle, Sphere };

/// Decay rate of a small perturbation of a round shape of radius R:
/// circle, Fourier mode k: -(k^4 - k^2) / R^4;
/// sphere, degree l, lambda = l(l+1): -lambda (lambda - 2) / R^4.
double linear_rate(RoundShape shape, double R, int mode);

/// Exact exponential propagation of Fourier coefficients u[k] of the radial
/// perturbation of a circle of radius R.
std::vector<std::complex<double>> spectral_reference_curve(const std::vector<std::complex<double>>& u0,
                                                          double R, double t);

/// Mass-weighted L2 norm of the discrete Laplacian of the mean curvature.
double stationarity_check(const DiscreteSurface& surface);

/// Mass-weighted centroid of the vertices of one component (all if -1).
Vec3 centroid(const DiscreteSurface& surface, int component = -1);

/// Fourier coefficient a + i b of f ~ a cos(k theta) + b sin(k theta), theta
/// measured around `center`, by mass-weighted least squares per mode.
std::complex<double> fourier_coefficient(const DiscreteSurface& curve, const SurfaceField& f, int k,
                                         const Vec3& center);

/// Radial distance of every vertex from `center`.
SurfaceField radial_field(const DiscreteSurface& surface, const Vec3& center);

/// Mass-weighted least-squares coefficient of the unit-max spherical
/// harmonic Y_l^m in f.
double harmonic_coefficient(const DiscreteSurface& sphere, const SurfaceField& f, int l, int m,
                            const Vec3& center);

/// Least-squares slope of log(amplitude) against time.
double fit_decay_rate(const std::vector<double>& time, const std::vector<double>& amplitude);

struct RateCheck {
  RoundShape shape = RoundShape::Circle;
  int mode = 0;
  double R = 1.0;
  int resolution = 0;  ///< n for curves, subdivision level for spheres
  double formula = 0.0;
  std::vector<double> amplitudes;
  std::vector<double> rates;  ///< finite-difference rate at each amplitude
  double extrapolated = 0.0;  ///< Richardson limit at zero amplitude
  double tolerance = 0.0;     ///< relative, or absolute for neutral modes
  bool pass = false;
};

/// Brute-force linearization of the discrete evolution: one implicit step
/// from the round shape perturbed by eps, 2 eps and 4 eps along the mode,
/// the rate read from the mode amplitude of the height, then extrapolated
/// to zero amplitude.
RateCheck verify_rate(RoundShape shape, int mode, double R, int resolution, double eps, double tolerance);

/// The checks that gate the shipped rate formulas.
std::vector<RateCheck> verify_rates();

std::string rate_report_json(const std::vector<RateCheck>& checks);

}  // namespace flatflow
