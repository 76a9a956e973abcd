#include "flatflow/laplace_beltrami.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "flatflow/kernels.hpp"

namespace flatflow {

struct Hm1Solver::Factor {
  SparseMatrix bordered;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

Hm1Solver Hm1Solver::assemble(const DiscreteSurface& s, Hm1Options options) {
  Hm1Solver out;
  out.options_ = options;
  const int n = s.vertex_count();
  out.mass_ = vertex_measure(s);
  out.component_ = s.component_ids();
  out.component_count_ = s.component_count();
  out.component_measure_.assign(static_cast<std::size_t>(out.component_count_), 0.0);
  for (int v = 0; v < n; ++v)
    out.component_measure_[static_cast<std::size_t>(out.component_[static_cast<std::size_t>(v)])] +=
        out.mass_(v);

  std::vector<Eigen::Triplet<double>> trip;
  if (s.is_curve()) {
    trip.reserve(static_cast<std::size_t>(4 * n));
    for (int v = 0; v < n; ++v) {
      const int w = s.next(v);
      const double k = 1.0 / (s.position(w) - s.position(v)).norm();
      trip.emplace_back(v, v, k);
      trip.emplace_back(w, w, k);
      trip.emplace_back(v, w, -k);
      trip.emplace_back(w, v, -k);
    }
  } else {
    const auto cot = kernels::parallel::cotangents(s);
    trip.reserve(s.triangles().size() * 12);
    for (std::size_t f = 0; f < cot.size(); ++f) {
      const Triangle& t = s.triangles()[f];
      for (int c = 0; c < 3; ++c) {
        // The corner at c faces the edge (c+1, c+2).
        const int i = t[static_cast<std::size_t>((c + 1) % 3)];
        const int j = t[static_cast<std::size_t>((c + 2) % 3)];
        const double w = 0.5 * cot[f][static_cast<std::size_t>(c)];
        trip.emplace_back(i, i, w);
        trip.emplace_back(j, j, w);
        trip.emplace_back(i, j, -w);
        trip.emplace_back(j, i, -w);
      }
    }
  }
  out.stiffness_.resize(n, n);
  out.stiffness_.setFromTriplets(trip.begin(), trip.end());

  // Bordered system [K C; C^T 0] with C(v, comp(v)) = M_v / |component|.
  auto factor = std::make_shared<Factor>();
  const int nc = out.component_count_;
  for (int v = 0; v < n; ++v) {
    const int c = out.component_[static_cast<std::size_t>(v)];
    const double w = out.mass_(v) / out.component_measure_[static_cast<std::size_t>(c)];
    trip.emplace_back(v, n + c, w);
    trip.emplace_back(n + c, v, w);
  }
  factor->bordered.resize(n + nc, n + nc);
  factor->bordered.setFromTriplets(trip.begin(), trip.end());
  factor->bordered.makeCompressed();
  factor->lu.compute(factor->bordered);
  if (factor->lu.info() != Eigen::Success)
    throw SolverError("Laplace-Beltrami factorization failed: " + factor->lu.lastErrorMessage());
  out.factor_ = std::move(factor);
  return out;
}

std::vector<double> Hm1Solver::component_means(const SurfaceField& f) const {
  std::vector<double> m(static_cast<std::size_t>(component_count_), 0.0);
  for (int v = 0; v < size(); ++v)
    m[static_cast<std::size_t>(component_[static_cast<std::size_t>(v)])] += mass_(v) * f(v);
  for (int c = 0; c < component_count_; ++c)
    m[static_cast<std::size_t>(c)] /= component_measure_[static_cast<std::size_t>(c)];
  return m;
}

SurfaceField Hm1Solver::remove_means(const SurfaceField& f) const {
  const auto m = component_means(f);
  SurfaceField g = f;
  for (int v = 0; v < size(); ++v) g(v) -= m[static_cast<std::size_t>(component_[static_cast<std::size_t>(v)])];
  return g;
}

bool Hm1Solver::is_compatible(const SurfaceField& xi) const {
  const double total = mass_.sum();
  const double rms = std::sqrt(inner(xi, xi) / total);
  for (double m : component_means(xi))
    if (std::abs(m) > options_.compatibility_tol * rms) return false;
  return true;
}

void Hm1Solver::check_compatible(const SurfaceField& xi) const {
  if (xi.size() != size()) throw Error("field length does not match the surface");
  const double total = mass_.sum();
  const double rms = std::sqrt(inner(xi, xi) / total);
  const auto means = component_means(xi);
  for (int c = 0; c < component_count_; ++c) {
    const double m = means[static_cast<std::size_t>(c)];
    if (std::abs(m) > options_.compatibility_tol * rms)
      throw CompatibilityError("density has nonzero mean " + std::to_string(m) + " on component " +
                                   std::to_string(c) + ": enclosed volume is not preserved",
                               c, m);
  }
}

double Hm1Solver::inner(const SurfaceField& a, const SurfaceField& b) const {
  return (a.array() * mass_.array() * b.array()).sum();
}

SurfaceField Hm1Solver::apply_laplacian(const SurfaceField& f) const {
  if (f.size() != size()) throw Error("field length does not match the surface");
  return -(stiffness_ * f).cwiseQuotient(mass_);
}

SurfaceField Hm1Solver::solve_bordered(const SurfaceField& rhs) const {
  const int n = size();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + component_count_);
  b.head(n) = rhs;
  Eigen::VectorXd x = factor_->lu.solve(b);
  const double scale = std::max(b.norm(), 1e-300);
  for (int it = 0; it < 3; ++it) {
    const Eigen::VectorXd r = b - factor_->bordered * x;
    if (r.norm() <= options_.residual_tol * scale) break;
    x += factor_->lu.solve(r);
  }
  return x.head(n);
}

SurfaceField Hm1Solver::solve_poisson(const SurfaceField& xi) const {
  check_compatible(xi);
  if (xi.isZero(0.0)) return SurfaceField::Zero(size());
  return solve_bordered(mass_.cwiseProduct(xi));
}

double Hm1Solver::hm1_norm(const SurfaceField& xi) const {
  const SurfaceField f = solve_poisson(xi);
  return std::sqrt(std::max(0.0, inner(xi, f)));
}

NormSuite Hm1Solver::norm_suite(const SurfaceField& f) const {
  NormSuite out;
  out.l2 = std::sqrt(inner(f, f));
  out.h1_semi = std::sqrt(std::max(0.0, f.dot(stiffness_ * f)));
  if (is_compatible(f)) out.hm1 = hm1_norm(f);
  return out;
}

}  // namespace flatflow
