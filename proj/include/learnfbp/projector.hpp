#pragma once

#include <functional>
#include <span>

#include "learnfbp/data.hpp"
#include "learnfbp/geometry.hpp"

namespace learnfbp {

/**
 * Joseph-style line integrals: the ray is sampled on every voxel-center plane
 * perpendicular to its dominant axis, the volume is linearly (2D) or
 * bilinearly (3D) interpolated inside the plane with zero outside the grid,
 * and each sample is weighted by voxel_size / |cos| of the ray to that axis.
 */
ProjectionStack forward_project(const Geometry& geom, const VolumeImage& vol);

/// Exact transpose of forward_project (same weights, scattered).
VolumeImage back_project(const Geometry& geom, const ProjectionStack& stack);

// Raw-buffer variants; sizes must equal voxel_count() / measurement_count().
void forward_project(const Geometry& geom, std::span<const double> vol,
                     std::span<double> out);
void back_project(const Geometry& geom, std::span<const double> stack,
                  std::span<double> vol);

/// Visits (voxel index, weight) for every nonzero coefficient of one ray's row.
void for_each_ray_coefficient(const Geometry& geom, const Ray& ray,
                              const std::function<void(std::size_t, double)>& visit);

} // namespace learnfbp
