#pragma once

#include <vector>

#include "learnfbp/geometry.hpp"
#include "learnfbp/rng.hpp"

namespace fixtures {

using namespace learnfbp;

inline GeometryParams parallel(std::size_t n, std::size_t d, std::size_t m) {
    GeometryParams p;
    p.kind = GeometryKind::Parallel2D;
    p.n_angles = m;
    p.det_shape = {d};
    p.vol_shape = {n, n};
    p.vol_voxel_size = 1.0 / static_cast<double>(n);
    p.det_pixel_size = 1.6 / static_cast<double>(d);
    return p;
}

inline GeometryParams fan(std::size_t n, std::size_t d, std::size_t m) {
    GeometryParams p = parallel(n, d, m);
    p.kind = GeometryKind::Fan2D;
    p.sod = 3.0;
    p.sdd = 6.0;
    p.det_pixel_size = 3.2 / static_cast<double>(d);
    return p;
}

inline GeometryParams elliptical(std::size_t n, std::size_t d, std::size_t m) {
    GeometryParams p = fan(n, d, m);
    p.kind = GeometryKind::EllipticalFan2D;
    p.sod_major = 4.5;
    p.sdd_major = 8.0;
    return p;
}

inline GeometryParams laminography(std::size_t nz, std::size_t n, std::size_t d,
                                   std::size_t m) {
    GeometryParams p;
    p.kind = GeometryKind::Laminography3D;
    p.n_angles = m;
    p.det_shape = {d, d};
    p.vol_shape = {nz, n, n};
    p.vol_voxel_size = 1.0 / static_cast<double>(n);
    p.sod = 3.0;
    p.sdd = 6.0;
    p.det_pixel_size = 4.0 / static_cast<double>(d);
    p.tilt_phi = 45.0;
    return p;
}

/// One small instance of each kind.
inline std::vector<GeometryParams> tiny_all(std::size_t n = 8, std::size_t d = 8,
                                            std::size_t m = 4) {
    return {parallel(n, d, m), fan(n, d, m), elliptical(n, d, m), laminography(4, n, d, m)};
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
    Random rng(seed);
    std::vector<double> v(n);
    for (double& e : v) e = rng.uniform(lo, hi);
    return v;
}

} // namespace fixtures
