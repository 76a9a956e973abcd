#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "flatflow/geometry.hpp"

namespace testing {

using namespace flatflow;

inline DiscreteSurface circle(int n, double R = 1.0) {
  ShapeSpec s;
  s.kind = ShapeKind::Circle;
  s.R = R;
  s.n = n;
  return build_shape(s);
}

inline DiscreteSurface sphere(int subdiv, double R = 1.0) {
  ShapeSpec s;
  s.kind = ShapeKind::Sphere;
  s.R = R;
  s.subdiv = subdiv;
  return build_shape(s);
}

inline DiscreteSurface ellipse(double a, double b, int n) {
  ShapeSpec s;
  s.kind = ShapeKind::Ellipse;
  s.a = a;
  s.b = b;
  s.n = n;
  return build_shape(s);
}

inline DiscreteSurface perturbed_circle(int n, double amplitude, int mode) {
  ShapeSpec s;
  s.kind = ShapeKind::PerturbedCircle;
  s.n = n;
  s.amplitude = amplitude;
  s.mode = mode;
  return build_shape(s);
}

inline double angle(const DiscreteSurface& s, int v) { return std::atan2(s.position(v).y(), s.position(v).x()); }

/// f(theta_v) at every vertex.
template <class F>
SurfaceField on_angles(const DiscreteSurface& s, F f) {
  SurfaceField out(s.vertex_count());
  for (int v = 0; v < s.vertex_count(); ++v) out(v) = f(angle(s, v));
  return out;
}

/// Cosine coefficient of f in an unweighted least-squares fit by
/// 1, cos(k theta), sin(k theta) over the vertex angles.
inline double cosine_coefficient(const DiscreteSurface& s, const SurfaceField& f, int k) {
  Eigen::MatrixXd A(s.vertex_count(), 3);
  for (int v = 0; v < s.vertex_count(); ++v) {
    const double t = angle(s, v);
    A.row(v) << 1.0, std::cos(k * t), std::sin(k * t);
  }
  return A.colPivHouseholderQr().solve(f)(1);
}

inline double max_abs(const SurfaceField& f) { return f.cwiseAbs().maxCoeff(); }

}  // namespace testing
