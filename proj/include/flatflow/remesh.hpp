#pragma once

#include <vector>

#include "flatflow/geometry.hpp"

namespace flatflow {

enum class RemeshPolicy { Off, ArcLength2D, Quality3D, Auto };

struct RemeshOptions {
  RemeshPolicy policy = RemeshPolicy::Auto;
  double arc_length_ratio = 1.5;  ///< 2D trigger: max / min edge length
  double min_angle_deg = 15.0;    ///< 3D trigger: smallest triangle angle
  double edge_ratio_cap = 4.0;    ///< 3D trigger: max / min edge length
  int smoothing_passes = 3;
};

struct MeshQuality {
  double edge_ratio = 1.0;
  double min_angle_deg = 60.0;  ///< 3D only
};

MeshQuality mesh_quality(const DiscreteSurface& surface);

bool needs_remesh(const DiscreteSurface& surface, const RemeshOptions& options);

/// Every component resampled at the same vertex count, uniformly in arc
/// length of its periodic cubic-spline interpolant.
DiscreteSurface resample_arc_length(const DiscreteSurface& curve);

/// Delaunay edge flips followed by tangential Laplacian smoothing.
DiscreteSurface improve_mesh(const DiscreteSurface& mesh, int smoothing_passes);

/// Shifts every component along its vertex normals by the constant that
/// restores the given enclosed volumes.
DiscreteSurface restore_volume(const DiscreteSurface& surface, const std::vector<double>& volume);

/// Applies the policy when triggered and restores the volumes of the input.
/// Returns the input unchanged otherwise; `changed` reports which.
DiscreteSurface remesh(const DiscreteSurface& surface, const RemeshOptions& options, bool* changed = nullptr);

}  // namespace flatflow
