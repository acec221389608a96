#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "learnfbp/data.hpp"
#include "learnfbp/fft.hpp"
#include "learnfbp/geometry.hpp"

namespace learnfbp {

enum class ClassicalFilter { RamLak, SheppLogan, Hann, Hamming };

std::string to_string(ClassicalFilter kind);
ClassicalFilter classical_filter_from_string(const std::string& name);

/// Signed normalized frequency of DFT bin k, in [-1/2, 1/2).
double signed_frequency(std::size_t k, std::size_t n);

/// Number of non-redundant bins of an even spectrum of length n.
inline std::size_t half_length(std::size_t n) { return n / 2 + 1; }
/// Bin k of an even length-n spectrum maps to half-spectrum entry min(k, n - k).
inline std::size_t fold_bin(std::size_t k, std::size_t n) { return k == 0 ? 0 : std::min(k, n - k); }

/// Full-spectrum gains (length d): 2|f| times the named window of |f|.
std::vector<double> classical_filter(ClassicalFilter kind, std::size_t d);

/**
 * Learnable parameters p = (p_filter, p_weight) of the structured operator
 * B(p) = [F^-1 diag(p_filter) F] diag(p_weight), block-diagonal over angles.
 *
 * The filter is stored as a half spectrum per frequency axis, so the
 * materialized gains are even in every axis and B(p) maps real data to real
 * data. Shapes by kind:
 *
 *   kind              filter          weight
 *   Parallel2D        (h)             -
 *   Fan2D             (h)             (d)
 *   EllipticalFan2D   (m, h)          (m, d)
 *   Laminography3D    (m, h1, h2)     (m, d1, d2)
 *
 * with h = d/2 + 1.
 */
struct FilterParams {
    GeometryKind kind = GeometryKind::Parallel2D;
    std::size_t n_angles = 0;
    Shape det_shape;
    std::vector<double> filter;
    std::vector<double> weight;

    /// All-zero parameters with shapes matching `geom`.
    static FilterParams zeros(const Geometry& geom);

    bool has_weights() const { return kind != GeometryKind::Parallel2D; }
    bool per_angle() const {
        return kind == GeometryKind::EllipticalFan2D || kind == GeometryKind::Laminography3D;
    }
    Shape half_shape() const;            // half-spectrum dims of one block
    std::size_t filter_block() const;    // filter entries per angle block
    std::size_t pixels() const { return element_count(det_shape); }
    Shape filter_shape() const;
    Shape weight_shape() const;

    std::span<const double> filter_block(std::size_t angle) const;
    std::span<const double> weight_block(std::size_t angle) const;

    /// Materialized even gains for one angle (length d or d1*d2).
    std::vector<double> full_filter(std::size_t angle) const;

    void check_against(const Geometry& geom) const;
};

/// Adds the full-spectrum gradient of one block onto its half-spectrum storage.
void fold_gradient(std::span<const double> full, const Shape& det_shape,
                   std::span<double> half);

/**
 * Standard pre-weights shaped like p_weight: sdd / sqrt(sdd^2 + u^2 [+ v^2]).
 * EllipticalFan2D uses each angle's source-to-detector distance.
 * Parallel2D has no weights and throws.
 */
std::vector<double> standard_weights(const Geometry& geom);

/**
 * Constant that turns back_project(F^-1 ramp F y) into an approximate inverse
 * for a full 360 degree scan: pi / (2 m s^2) in 2D, and
 * cos(phi) pi dv sod / (2 m s^3 sdd) for laminography (row-wise ramp along u).
 */
double classical_scale(const Geometry& geom);

/// Classical FBP/FDK operator: windowed ramp times classical_scale, standard weights.
FilterParams classical_params(const Geometry& geom, ClassicalFilter kind);

/**
 * Applies B(p) block by block with reusable FFT buffers; also produces the
 * parameter gradient of <g, B(p) y>. Not thread-safe.
 */
class FilterEngine {
  public:
    explicit FilterEngine(const Geometry& geom);

    void apply(const FilterParams& p, std::span<const double> y, std::span<double> out);

    /// grad.filter += d<g, B(p)y>/d p_filter, grad.weight += d<g, B(p)y>/d p_weight.
    void accumulate_gradient(const FilterParams& p, std::span<const double> y,
                             std::span<const double> g, FilterParams& grad);

  private:
    Geometry geom_;
    Spectrum spectrum_;
    std::vector<double> real_;
    std::vector<Complex> spec_a_, spec_b_;
};

ProjectionStack apply_B(const FilterParams& params, const Geometry& geom,
                        const ProjectionStack& stack);

/// back_project(geom, apply_B(params, geom, stack)).
VolumeImage reconstruct(const FilterParams& params, const Geometry& geom,
                        const ProjectionStack& stack);

/**
 * Fixes the filter/weight scale ambiguity: s = <w, w_std>/<w_std, w_std>,
 * weights -> w/s, filter -> s * filter. Throws when s == 0.
 */
FilterParams gauge_normalize(const FilterParams& params, const Geometry& geom);

} // namespace learnfbp
