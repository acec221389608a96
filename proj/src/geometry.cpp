#include "learnfbp/geometry.hpp"

#include <cmath>
#include <numbers>

#include "learnfbp/errors.hpp"

namespace learnfbp {

namespace {

constexpr double kPi = std::numbers::pi;

bool all_positive(const Shape& s) {
    if (s.empty()) return false;
    for (auto v : s)
        if (v == 0) return false;
    return true;
}

} // namespace

std::string to_string(GeometryKind kind) {
    switch (kind) {
    case GeometryKind::Parallel2D: return "Parallel2D";
    case GeometryKind::Fan2D: return "Fan2D";
    case GeometryKind::EllipticalFan2D: return "EllipticalFan2D";
    case GeometryKind::Laminography3D: return "Laminography3D";
    }
    return "?";
}

GeometryKind geometry_kind_from_string(const std::string& name) {
    for (auto k : {GeometryKind::Parallel2D, GeometryKind::Fan2D,
                   GeometryKind::EllipticalFan2D, GeometryKind::Laminography3D})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown geometry kind '" + name + "'");
}

Geometry make_geometry(const GeometryParams& p) {
    require(p.n_angles >= 1, "n_angles must be >= 1");
    require(p.det_pixel_size > 0.0, "det_pixel_size must be positive");
    require(p.vol_voxel_size > 0.0, "vol_voxel_size must be positive");
    require(all_positive(p.det_shape), "detector dimensions must be positive");
    require(all_positive(p.vol_shape), "volume dimensions must be positive");

    const bool is3d = p.kind == GeometryKind::Laminography3D;
    require(p.det_shape.size() == (is3d ? 2u : 1u),
            "detector shape has wrong rank for " + to_string(p.kind));
    require(p.vol_shape.size() == (is3d ? 3u : 2u),
            "volume shape has wrong rank for " + to_string(p.kind));

    if (p.kind != GeometryKind::Parallel2D) {
        require(p.sod > 0.0, "sod must be positive");
        require(p.sdd > p.sod, "sdd must exceed sod");
    }
    if (p.kind == GeometryKind::EllipticalFan2D) {
        require(p.sod_major > 0.0, "sod_major must be positive");
        require(p.sdd_major > p.sod_major, "sdd_major must exceed sod_major");
    }
    if (is3d) {
        require(p.tilt_phi > 0.0 && p.tilt_phi < 90.0,
                "tilt_phi must lie strictly between 0 and 90 degrees");
    }
    return Geometry(p);
}

Shape Geometry::stack_shape() const {
    Shape s{p_.n_angles};
    s.insert(s.end(), p_.det_shape.begin(), p_.det_shape.end());
    return s;
}

double Geometry::angle(std::size_t k) const {
    return 2.0 * kPi * static_cast<double>(k) / static_cast<double>(p_.n_angles);
}

double Geometry::u_offset(std::size_t col) const {
    return (static_cast<double>(col) - 0.5 * static_cast<double>(det_cols() - 1)) *
           p_.det_pixel_size;
}

double Geometry::v_offset(std::size_t row) const {
    return (static_cast<double>(row) - 0.5 * static_cast<double>(det_rows() - 1)) *
           p_.det_pixel_size;
}

double Geometry::volume_radius() const {
    double r2 = 0.0;
    for (auto n : p_.vol_shape) {
        const double half = 0.5 * static_cast<double>(n) * p_.vol_voxel_size;
        r2 += half * half;
    }
    return std::sqrt(r2);
}

Vec3 Geometry::source_position(std::size_t k) const {
    const double th = angle(k);
    const double c = std::cos(th), s = std::sin(th);
    switch (p_.kind) {
    case GeometryKind::Parallel2D: {
        const double r = volume_radius() + 2.0 * p_.vol_voxel_size;
        return Vec3(s * r, -c * r, 0.0);
    }
    case GeometryKind::Fan2D: return Vec3(p_.sod * c, p_.sod * s, 0.0);
    case GeometryKind::EllipticalFan2D:
        return Vec3(p_.sod_major * c, p_.sod * s, 0.0);
    case GeometryKind::Laminography3D: {
        const double phi = p_.tilt_phi * kPi / 180.0;
        return p_.sod * Vec3(std::cos(phi) * c, std::cos(phi) * s, -std::sin(phi));
    }
    }
    return Vec3::Zero();
}

double Geometry::effective_sod(std::size_t k) const {
    if (p_.kind == GeometryKind::Parallel2D) return 0.0;
    return source_position(k).norm();
}

double Geometry::effective_sdd(std::size_t k) const {
    switch (p_.kind) {
    case GeometryKind::Parallel2D: return 0.0;
    case GeometryKind::EllipticalFan2D: {
        // The detector rides its own ellipse opposite the source; only its
        // distance is taken from it, the center is re-aimed through the origin.
        const double th = angle(k);
        const double a = p_.sdd_major - p_.sod_major;
        const double b = p_.sdd - p_.sod;
        const double det = std::hypot(a * std::cos(th), b * std::sin(th));
        return source_position(k).norm() + det;
    }
    default: return p_.sdd;
    }
}

DetectorFrame Geometry::detector_frame(std::size_t k) const {
    const double th = angle(k);
    const double c = std::cos(th), s = std::sin(th);
    if (p_.kind == GeometryKind::Parallel2D) {
        return {Vec3::Zero(), Vec3(c, s, 0.0), Vec3::Zero()};
    }
    const Vec3 src = source_position(k);
    const Vec3 central = -src.normalized();
    const Vec3 center = src + effective_sdd(k) * central;
    if (p_.kind == GeometryKind::Laminography3D) {
        const Vec3 u(-s, c, 0.0);
        return {center, u, central.cross(u)};
    }
    return {center, Vec3(central.y(), -central.x(), 0.0), Vec3::Zero()};
}

RayBundle rays_for_angle(const Geometry& geom, std::size_t k) {
    require(k < geom.n_angles(), "angle index out of range");
    RayBundle bundle;
    bundle.angle_index = k;
    bundle.rays.reserve(geom.pixels_per_angle());

    const auto frame = geom.detector_frame(k);
    if (geom.kind() == GeometryKind::Parallel2D) {
        const double th = geom.angle(k);
        const Vec3 dir(-std::sin(th), std::cos(th), 0.0);
        const double reach = geom.volume_radius() + 2.0 * geom.voxel_size();
        for (std::size_t j = 0; j < geom.det_cols(); ++j) {
            const Vec3 origin = geom.u_offset(j) * frame.u - reach * dir;
            bundle.rays.push_back({origin, dir, 2.0 * reach});
        }
        return bundle;
    }

    const Vec3 src = geom.source_position(k);
    for (std::size_t r = 0; r < geom.det_rows(); ++r) {
        const double v = geom.is_3d() ? geom.v_offset(r) : 0.0;
        for (std::size_t c = 0; c < geom.det_cols(); ++c) {
            const Vec3 pixel = frame.center + geom.u_offset(c) * frame.u + v * frame.v;
            const Vec3 delta = pixel - src;
            const double len = delta.norm();
            bundle.rays.push_back({src, delta / len, len});
        }
    }
    return bundle;
}

} // namespace learnfbp
