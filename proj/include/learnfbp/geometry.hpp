#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "learnfbp/data.hpp"

namespace learnfbp {

enum class GeometryKind { Parallel2D, Fan2D, EllipticalFan2D, Laminography3D };

std::string to_string(GeometryKind kind);
GeometryKind geometry_kind_from_string(const std::string& name);

using Vec3 = Eigen::Vector3d;

/**
 * Acquisition parameters. Lengths share one unit; angles in degrees.
 * Fields irrelevant to a kind are ignored (sod/sdd for Parallel2D, the
 * `_major` distances outside EllipticalFan2D, tilt outside Laminography3D).
 */
struct GeometryParams {
    GeometryKind kind = GeometryKind::Parallel2D;
    std::size_t n_angles = 1;
    Shape det_shape;           // (d) or (d1 rows, d2 cols)
    double det_pixel_size = 1.0;
    Shape vol_shape;           // (n, n) or (slices, n, n)
    double vol_voxel_size = 1.0;
    double sod = 0.0;          // semi-minor axis for EllipticalFan2D
    double sdd = 0.0;
    double sod_major = 0.0;
    double sdd_major = 0.0;
    double tilt_phi = 0.0;     // degrees, Laminography3D only

    bool operator==(const GeometryParams&) const = default;
};

/// Detector placement for one angle. `v` is zero for 2D kinds.
struct DetectorFrame {
    Vec3 center;
    Vec3 u;
    Vec3 v;
};

struct Ray {
    Vec3 source;
    Vec3 direction;  // unit norm
    double length;   // the line integral covers t in [0, length]
};

struct RayBundle {
    std::size_t angle_index = 0;
    std::vector<Ray> rays;  // one per detector pixel, row-major over (d1, d2)
};

/**
 * Validated, immutable acquisition geometry. Angle k sits at
 * theta_k = 2*pi*k/m, counter-clockwise from +x.
 */
class Geometry {
  public:
    const GeometryParams& params() const { return p_; }
    GeometryKind kind() const { return p_.kind; }
    bool is_3d() const { return p_.kind == GeometryKind::Laminography3D; }

    std::size_t n_angles() const { return p_.n_angles; }
    const Shape& det_shape() const { return p_.det_shape; }
    const Shape& vol_shape() const { return p_.vol_shape; }
    double det_pixel_size() const { return p_.det_pixel_size; }
    double voxel_size() const { return p_.vol_voxel_size; }

    std::size_t pixels_per_angle() const { return element_count(p_.det_shape); }
    std::size_t measurement_count() const { return p_.n_angles * pixels_per_angle(); }
    std::size_t voxel_count() const { return element_count(p_.vol_shape); }

    Shape stack_shape() const;
    double angle(std::size_t k) const;

    /// Source point (undefined for Parallel2D, returns the far-side ray origin
    /// of the central pixel instead).
    Vec3 source_position(std::size_t k) const;
    DetectorFrame detector_frame(std::size_t k) const;
    /// Source-to-detector-center distance at angle k; varies for elliptical.
    double effective_sdd(std::size_t k) const;
    double effective_sod(std::size_t k) const;

    /// Physical detector offsets of pixel centers along u (columns) and v (rows).
    double u_offset(std::size_t col) const;
    double v_offset(std::size_t row) const;
    std::size_t det_cols() const { return p_.det_shape.back(); }
    std::size_t det_rows() const { return is_3d() ? p_.det_shape[0] : 1; }

    /// Half diagonal of the volume box.
    double volume_radius() const;

  private:
    friend Geometry make_geometry(const GeometryParams& params);
    explicit Geometry(GeometryParams p) : p_(std::move(p)) {}
    GeometryParams p_;
};

/// Throws ValidationError for nonpositive sizes, sdd <= sod, tilt outside (0, 90).
Geometry make_geometry(const GeometryParams& params);

RayBundle rays_for_angle(const Geometry& geom, std::size_t k);

} // namespace learnfbp
