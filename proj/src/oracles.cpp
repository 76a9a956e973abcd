#include "flatflow/oracles.hpp"

#include <cmath>

#include <json.hpp>

#include "flatflow/laplace_beltrami.hpp"
#include "flatflow/mm_step.hpp"

namespace flatflow {

double linear_rate(RoundShape shape, double R, int mode) {
  if (mode < 0) throw Error("mode index must be non-negative");
  const double R4 = R * R * R * R;
  const double k = mode;
  if (shape == RoundShape::Circle) return (k * k - k * k * k * k) / R4;
  const double lambda = k * (k + 1.0);
  return lambda * (2.0 - lambda) / R4;
}

std::vector<std::complex<double>> spectral_reference_curve(const std::vector<std::complex<double>>& u0,
                                                          double R, double t) {
  std::vector<std::complex<double>> out(u0.size());
  for (std::size_t k = 0; k < u0.size(); ++k)
    out[k] = u0[k] * std::exp(linear_rate(RoundShape::Circle, R, static_cast<int>(k)) * t);
  return out;
}

double stationarity_check(const DiscreteSurface& s) {
  const Hm1Solver solver = Hm1Solver::assemble(s);
  const SurfaceField lap = solver.apply_laplacian(mean_curvature_normal(s));
  return std::sqrt(solver.inner(lap, lap));
}

Vec3 centroid(const DiscreteSurface& s, int component) {
  const SurfaceField m = vertex_measure(s);
  Vec3 sum = Vec3::Zero();
  double w = 0.0;
  for (int v = 0; v < s.vertex_count(); ++v) {
    if (component >= 0 && s.component_of(v) != component) continue;
    sum += m(v) * s.position(v);
    w += m(v);
  }
  return sum / w;
}

SurfaceField radial_field(const DiscreteSurface& s, const Vec3& center) {
  SurfaceField r(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) r(v) = (s.position(v) - center).norm();
  return r;
}

std::complex<double> fourier_coefficient(const DiscreteSurface& s, const SurfaceField& f, int k,
                                         const Vec3& center) {
  const SurfaceField m = vertex_measure(s);
  if (k == 0) return {(m.array() * f.array()).sum() / m.sum(), 0.0};
  // Weighted least squares for f ~ c + a cos + b sin; the constant keeps the
  // mean out of (a, b) on samples that are not uniform in angle.
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (int v = 0; v < s.vertex_count(); ++v) {
    const Vec3 d = s.position(v) - center;
    const double th = std::atan2(d.y(), d.x());
    const Eigen::Vector3d phi(1.0, std::cos(k * th), std::sin(k * th));
    A += m(v) * phi * phi.transpose();
    rhs += m(v) * f(v) * phi;
  }
  const Eigen::Vector3d x = A.ldlt().solve(rhs);
  return {x(1), x(2)};
}

double harmonic_coefficient(const DiscreteSurface& s, const SurfaceField& f, int l, int m,
                            const Vec3& center) {
  const SurfaceField w = vertex_measure(s);
  if (l == 0) return (w.array() * f.array()).sum() / w.sum();
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (int v = 0; v < s.vertex_count(); ++v) {
    const Eigen::Vector2d phi(1.0, spherical_harmonic(l, m, s.position(v) - center));
    A += w(v) * phi * phi.transpose();
    rhs += w(v) * f(v) * phi;
  }
  return A.ldlt().solve(rhs)(1);
}

double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& a) {
  if (t.size() != a.size() || t.size() < 2) throw Error("decay fit needs matching samples");
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double y = std::log(std::abs(a[i]));
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

RateCheck verify_rate(RoundShape shape, int mode, double R, int resolution, double eps, double tolerance) {
  RateCheck out;
  out.shape = shape;
  out.mode = mode;
  out.R = R;
  out.resolution = resolution;
  out.formula = linear_rate(shape, R, mode);
  out.tolerance = tolerance;
  const double h = 1e-6 * R * R * R * R;
  const Vec3 origin = Vec3::Zero();
  for (double scale : {1.0, 2.0, 4.0}) {
    const double a = eps * scale * R;
    ShapeSpec spec;
    spec.R = R;
    spec.mode = mode;
    spec.amplitude = a;
    if (shape == RoundShape::Circle) {
      spec.kind = ShapeKind::PerturbedCircle;
      spec.n = resolution;
    } else {
      spec.kind = ShapeKind::PerturbedSphere;
      spec.subdiv = resolution;
    }
    const DiscreteSurface s = build_shape(spec);
    const CurvatureData c = compute_curvature(s);
    const Hm1Solver solver = Hm1Solver::assemble(s);
    StepConfig cfg;
    cfg.h = h;
    const StepResult r = step(s, c, solver, cfg);
    if (!r.converged) throw SolverError("rate verification step did not converge");
    const SurfaceField radial = radial_field(s, origin).array() - R;
    double a0, ak;
    if (shape == RoundShape::Circle) {
      a0 = fourier_coefficient(s, radial, mode, origin).real();
      ak = fourier_coefficient(s, r.psi, mode, origin).real();
    } else {
      a0 = harmonic_coefficient(s, radial, mode, 0, origin);
      ak = harmonic_coefficient(s, r.psi, mode, 0, origin);
    }
    out.amplitudes.push_back(a);
    out.rates.push_back(ak / (h * (a0 + ak)));
  }
  out.extrapolated = (8.0 * out.rates[0] - 6.0 * out.rates[1] + out.rates[2]) / 3.0;
  const double err = std::abs(out.extrapolated - out.formula);
  out.pass = out.formula == 0.0 ? err <= tolerance : err <= tolerance * std::abs(out.formula);
  return out;
}

std::vector<RateCheck> verify_rates() {
  std::vector<RateCheck> out;
  for (int k : {1, 2, 3}) out.push_back(verify_rate(RoundShape::Circle, k, 1.0, 512, 1e-3, k == 1 ? 0.05 : 0.01));
  for (int l : {1, 2}) out.push_back(verify_rate(RoundShape::Sphere, l, 1.0, 4, 1e-3, l == 1 ? 0.2 : 0.05));
  return out;
}

std::string rate_report_json(const std::vector<RateCheck>& checks) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["shape"] = c.shape == RoundShape::Circle ? "circle" : "sphere";
    e["mode"] = c.mode;
    e["R"] = c.R;
    e["resolution"] = c.resolution;
    e["formula"] = c.formula;
    e["amplitudes"] = c.amplitudes;
    e["rates"] = c.rates;
    e["extrapolated"] = c.extrapolated;
    e["tolerance"] = c.tolerance;
    e["pass"] = c.pass;
    j.push_back(std::move(e));
  }
  return j.dump(2);
}

}  // namespace flatflow
