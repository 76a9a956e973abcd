// Serial against OpenMP timings of the per-vertex and per-face kernels.
// Usage: bench_kernels [subdiv] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "flatflow/geometry.hpp"
#include "flatflow/kernels.hpp"

using namespace flatflow;
namespace k = flatflow::kernels;

namespace {

template <class Fn>
double best_of(int repeats, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

template <class T>
bool identical(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

bool identical(const std::vector<k::QuadricFit>& a, const std::vector<k::QuadricFit>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].k1 != b[i].k1 || a[i].k2 != b[i].k2 || a[i].normal != b[i].normal || a[i].ok != b[i].ok) return false;
  return true;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-20s %12.6f %12.6f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int subdiv = argc > 1 ? std::atoi(argv[1]) : 5;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  k::configure_threads();

  ShapeSpec spec;
  spec.kind = ShapeKind::PerturbedSphere;
  spec.subdiv = subdiv;
  spec.mode = 3;
  spec.amplitude = 0.1;
  const DiscreteSurface s = build_shape(spec);
  const std::vector<Vec3> normals = area_normals(s);
  std::printf("vertices %d, faces %zu, threads %d, best of %d\n", s.vertex_count(), s.triangles().size(),
              k::thread_count(), repeats);
  std::printf("%-20s %12s %12s %9s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

  bool ok = true;
  {
    std::vector<k::QuadricFit> a, b;
    const double ts = best_of(repeats, [&] { a = k::serial::fit_quadrics(s, normals); });
    const double tp = best_of(repeats, [&] { b = k::parallel::fit_quadrics(s, normals); });
    ok = identical(a, b) && ok;
    row("fit_quadrics", ts, tp, identical(a, b));
  }
  {
    std::vector<double> a, b;
    const double ts = best_of(repeats, [&] { a = k::serial::tangent_ball_radii(s, normals, 1.0); });
    const double tp = best_of(repeats, [&] { b = k::parallel::tangent_ball_radii(s, normals, 1.0); });
    ok = identical(a, b) && ok;
    row("tangent_ball_radii", ts, tp, identical(a, b));
  }
  {
    std::vector<std::array<double, 3>> a, b;
    const double ts = best_of(repeats, [&] { a = k::serial::cotangents(s); });
    const double tp = best_of(repeats, [&] { b = k::parallel::cotangents(s); });
    ok = identical(a, b) && ok;
    row("cotangents", ts, tp, identical(a, b));
  }
  return ok ? 0 : 1;
}
