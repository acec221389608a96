#include "learnfbp/data.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "learnfbp/errors.hpp"

namespace learnfbp {

std::size_t element_count(const Shape& shape) {
    if (shape.empty()) return 0;
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ')';
    return os.str();
}

VolumeImage::VolumeImage(Shape s, double voxel)
    : shape(std::move(s)), voxel_size(voxel), data(element_count(shape), 0.0) {
    require(shape.size() == 2 || shape.size() == 3,
            "volume must be 2D or 3D, got shape " + shape_string(shape));
    require(voxel > 0.0, "voxel size must be positive");
}

ProjectionStack::ProjectionStack(Shape s)
    : shape(std::move(s)), data(element_count(shape), 0.0) {
    require(shape.size() == 2 || shape.size() == 3,
            "projection stack must be (m, d) or (m, d1, d2), got " +
                shape_string(shape));
}

std::size_t ProjectionStack::pixels_per_angle() const {
    if (shape.size() < 2) return 0;
    return element_count(Shape(shape.begin() + 1, shape.end()));
}

std::span<double> ProjectionStack::view(std::size_t angle) {
    const auto p = pixels_per_angle();
    return {data.data() + angle * p, p};
}

std::span<const double> ProjectionStack::view(std::size_t angle) const {
    const auto p = pixels_per_angle();
    return {data.data() + angle * p, p};
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace learnfbp
