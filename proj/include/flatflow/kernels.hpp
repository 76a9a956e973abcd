#pragma once

// Data-parallel per-vertex / per-face kernels. Every kernel has a serial
// reference implementation and an OpenMP implementation with the same
// signature. Both evaluate the same per-item function and write to disjoint
// output slots, so their results are bit-identical; the tests hold them to
// that and the benchmark compares their timings.

#include <array>
#include <vector>

#include "flatflow/geometry.hpp"

namespace flatflow::kernels {

struct QuadricFit {
  Vec3 normal = Vec3::Zero();
  double k1 = 0.0, k2 = 0.0;  ///< k1 >= k2, positive for convex
  Vec3 dir1 = Vec3::Zero(), dir2 = Vec3::Zero();
  bool ok = false;
};

/// Second-order height fit h = a u^2 + b uv + c v^2 + d u + e v over the
/// two-ring of v, expressed in the tangent frame of `normal_guess`. Refits
/// once in the frame of the fitted normal.
QuadricFit fit_vertex_quadric(const DiscreteSurface& surface, const Vec3& normal_guess, int v);

/// Uniform grid over vertex positions.
class SpatialHash {
 public:
  SpatialHash(const std::vector<Vec3>& points, double cell);
  /// Calls fn(q) for every point index within `radius` of x (superset).
  template <class Fn>
  void for_each_near(const Vec3& x, double radius, Fn&& fn) const;

 private:
  std::array<long, 3> cell_of(const Vec3& x) const;
  long key(const std::array<long, 3>& c) const;

  double cell_;
  Vec3 origin_;
  std::array<long, 3> dims_{};
  std::vector<long> starts_;  // CSR over cell keys
  std::vector<int> items_;
};

/// Smallest radius of a ball tangent to the surface at v (normal n_v) that
/// touches another vertex more than three rings away; +inf when none lies
/// within `search_radius`.
double tangent_ball_radius(const DiscreteSurface& surface, const std::vector<Vec3>& normals,
                           const SpatialHash& hash, double search_radius, int v);

/// Cotangents of the three corner angles of a triangle.
std::array<double, 3> corner_cotangents(const DiscreteSurface& surface, int face);

namespace serial {
std::vector<QuadricFit> fit_quadrics(const DiscreteSurface& surface,
                                     const std::vector<Vec3>& normal_guess);
std::vector<double> tangent_ball_radii(const DiscreteSurface& surface,
                                       const std::vector<Vec3>& normals, double search_radius);
std::vector<std::array<double, 3>> cotangents(const DiscreteSurface& surface);
}  // namespace serial

namespace parallel {
std::vector<QuadricFit> fit_quadrics(const DiscreteSurface& surface,
                                     const std::vector<Vec3>& normal_guess);
std::vector<double> tangent_ball_radii(const DiscreteSurface& surface,
                                       const std::vector<Vec3>& normals, double search_radius);
std::vector<std::array<double, 3>> cotangents(const DiscreteSurface& surface);
}  // namespace parallel

/// Caps OpenMP parallelism. Reads FLATFLOW_THREADS when n <= 0.
void configure_threads(int n = 0);
int thread_count();

// ---------------------------------------------------------------------------

template <class Fn>
void SpatialHash::for_each_near(const Vec3& x, double radius, Fn&& fn) const {
  const auto lo = cell_of(x - Vec3::Constant(radius));
  const auto hi = cell_of(x + Vec3::Constant(radius));
  for (long i = lo[0]; i <= hi[0]; ++i)
    for (long j = lo[1]; j <= hi[1]; ++j)
      for (long k = lo[2]; k <= hi[2]; ++k) {
        const long kk = key({i, j, k});
        for (long s = starts_[static_cast<std::size_t>(kk)];
             s < starts_[static_cast<std::size_t>(kk) + 1]; ++s)
          fn(items_[static_cast<std::size_t>(s)]);
      }
}

}  // namespace flatflow::kernels
