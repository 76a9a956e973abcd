#include <cstdlib>
#include <string>

#include <omp.h>

#include "flatflow/kernels.hpp"

namespace flatflow::kernels {

void configure_threads(int n) {
  if (n <= 0) {
    if (const char* env = std::getenv("FLATFLOW_THREADS")) {
      try {
        n = std::stoi(env);
      } catch (const std::exception&) {
        n = 0;
      }
    }
  }
  if (n > 0) omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

namespace parallel {

std::vector<QuadricFit> fit_quadrics(const DiscreteSurface& surface,
                                     const std::vector<Vec3>& normal_guess) {
  const int n = surface.vertex_count();
  std::vector<QuadricFit> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int v = 0; v < n; ++v)
    out[static_cast<std::size_t>(v)] =
        fit_vertex_quadric(surface, normal_guess[static_cast<std::size_t>(v)], v);
  return out;
}

std::vector<double> tangent_ball_radii(const DiscreteSurface& surface,
                                       const std::vector<Vec3>& normals, double search_radius) {
  const SpatialHash hash(surface.positions(), search_radius);
  const int n = surface.vertex_count();
  std::vector<double> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 64)
  for (int v = 0; v < n; ++v)
    out[static_cast<std::size_t>(v)] = tangent_ball_radius(surface, normals, hash, search_radius, v);
  return out;
}

std::vector<std::array<double, 3>> cotangents(const DiscreteSurface& surface) {
  const int nf = static_cast<int>(surface.triangles().size());
  std::vector<std::array<double, 3>> out(static_cast<std::size_t>(nf));
#pragma omp parallel for schedule(static)
  for (int f = 0; f < nf; ++f) out[static_cast<std::size_t>(f)] = corner_cotangents(surface, f);
  return out;
}

}  // namespace parallel

}  // namespace flatflow::kernels
