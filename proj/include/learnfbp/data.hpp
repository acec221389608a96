#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace learnfbp {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/**
 * Object x on a centered voxel grid. Row-major, shape (ny, nx) for 2D or
 * (nz, ny, nx) for 3D; all axes share `voxel_size`.
 */
struct VolumeImage {
    Shape shape;
    double voxel_size = 1.0;
    std::vector<double> data;

    VolumeImage() = default;
    VolumeImage(Shape s, double voxel);

    std::size_t size() const { return data.size(); }
    bool is_3d() const { return shape.size() == 3; }
};

/// Projection data y, shape (m, d) or (m, d1, d2), angle-major.
struct ProjectionStack {
    Shape shape;
    std::vector<double> data;

    ProjectionStack() = default;
    explicit ProjectionStack(Shape s);

    std::size_t size() const { return data.size(); }
    std::size_t n_angles() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t pixels_per_angle() const;

    std::span<double> view(std::size_t angle);
    std::span<const double> view(std::size_t angle) const;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
bool all_finite(std::span<const double> a);

} // namespace learnfbp
