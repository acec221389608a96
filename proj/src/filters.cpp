#include "learnfbp/filters.hpp"

#include <cmath>
#include <numbers>

#include "learnfbp/errors.hpp"
#include "learnfbp/projector.hpp"

namespace learnfbp {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(ClassicalFilter kind) {
    switch (kind) {
    case ClassicalFilter::RamLak: return "RamLak";
    case ClassicalFilter::SheppLogan: return "SheppLogan";
    case ClassicalFilter::Hann: return "Hann";
    case ClassicalFilter::Hamming: return "Hamming";
    }
    return "?";
}

ClassicalFilter classical_filter_from_string(const std::string& name) {
    for (auto k : {ClassicalFilter::RamLak, ClassicalFilter::SheppLogan,
                   ClassicalFilter::Hann, ClassicalFilter::Hamming})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown filter '" + name + "'");
}

double signed_frequency(std::size_t k, std::size_t n) {
    const auto kk = static_cast<double>(k), nn = static_cast<double>(n);
    return 2 * k < n ? kk / nn : (kk - nn) / nn;
}

std::vector<double> classical_filter(ClassicalFilter kind, std::size_t d) {
    require(d >= 2, "filter length must be >= 2");
    std::vector<double> gains(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double f = std::abs(signed_frequency(k, d));
        double window = 1.0;
        switch (kind) {
        case ClassicalFilter::RamLak: break;
        case ClassicalFilter::SheppLogan:
            window = f == 0.0 ? 1.0 : std::sin(kPi * f) / (kPi * f);
            break;
        case ClassicalFilter::Hann: window = 0.5 * (1.0 + std::cos(2.0 * kPi * f)); break;
        case ClassicalFilter::Hamming: window = 0.54 + 0.46 * std::cos(2.0 * kPi * f); break;
        }
        gains[k] = 2.0 * f * window;
    }
    return gains;
}

// ---------------------------------------------------------------------------
// FilterParams

FilterParams FilterParams::zeros(const Geometry& geom) {
    FilterParams p;
    p.kind = geom.kind();
    p.n_angles = geom.n_angles();
    p.det_shape = geom.det_shape();
    p.filter.assign(element_count(p.filter_shape()), 0.0);
    if (p.has_weights()) p.weight.assign(element_count(p.weight_shape()), 0.0);
    return p;
}

Shape FilterParams::half_shape() const {
    Shape h;
    for (auto n : det_shape) h.push_back(half_length(n));
    return h;
}

std::size_t FilterParams::filter_block() const { return element_count(half_shape()); }

Shape FilterParams::filter_shape() const {
    Shape s;
    if (per_angle()) s.push_back(n_angles);
    for (auto n : half_shape()) s.push_back(n);
    return s;
}

Shape FilterParams::weight_shape() const {
    if (!has_weights()) return {};
    Shape s;
    if (per_angle()) s.push_back(n_angles);
    s.insert(s.end(), det_shape.begin(), det_shape.end());
    return s;
}

std::span<const double> FilterParams::filter_block(std::size_t angle) const {
    const std::size_t b = filter_block();
    return {filter.data() + (per_angle() ? angle * b : 0), b};
}

std::span<const double> FilterParams::weight_block(std::size_t angle) const {
    if (!has_weights()) return {};
    const std::size_t b = pixels();
    return {weight.data() + (per_angle() ? angle * b : 0), b};
}

std::vector<double> FilterParams::full_filter(std::size_t angle) const {
    const auto half = filter_block(angle);
    std::vector<double> full(pixels());
    if (det_shape.size() == 1) {
        const std::size_t d = det_shape[0];
        for (std::size_t k = 0; k < d; ++k) full[k] = half[fold_bin(k, d)];
    } else {
        const std::size_t d1 = det_shape[0], d2 = det_shape[1];
        const std::size_t h2 = half_length(d2);
        for (std::size_t r = 0; r < d1; ++r)
            for (std::size_t c = 0; c < d2; ++c)
                full[r * d2 + c] = half[fold_bin(r, d1) * h2 + fold_bin(c, d2)];
    }
    return full;
}

void FilterParams::check_against(const Geometry& geom) const {
    require(kind == geom.kind(), "filter parameters are for " + to_string(kind) +
                                     " but geometry is " + to_string(geom.kind()));
    require(n_angles == geom.n_angles() && det_shape == geom.det_shape(),
            "filter parameters do not match the geometry's angles/detector");
    require(filter.size() == element_count(filter_shape()), "p_filter has wrong size");
    require(weight.size() == (has_weights() ? element_count(weight_shape()) : 0),
            "p_weight has wrong size");
}

void fold_gradient(std::span<const double> full, const Shape& det_shape,
                   std::span<double> half) {
    if (det_shape.size() == 1) {
        const std::size_t d = det_shape[0];
        for (std::size_t k = 0; k < d; ++k) half[fold_bin(k, d)] += full[k];
        return;
    }
    const std::size_t d1 = det_shape[0], d2 = det_shape[1];
    const std::size_t h2 = half_length(d2);
    for (std::size_t r = 0; r < d1; ++r)
        for (std::size_t c = 0; c < d2; ++c)
            half[fold_bin(r, d1) * h2 + fold_bin(c, d2)] += full[r * d2 + c];
}

// ---------------------------------------------------------------------------
// Classical operators

std::vector<double> standard_weights(const Geometry& geom) {
    require(geom.kind() != GeometryKind::Parallel2D,
            "standard weights are undefined for Parallel2D");
    const std::size_t rows = geom.det_rows(), cols = geom.det_cols();
    auto block = [&](double sdd) {
        std::vector<double> w(rows * cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const double v = geom.is_3d() ? geom.v_offset(r) : 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                const double u = geom.u_offset(c);
                w[r * cols + c] = sdd / std::sqrt(sdd * sdd + u * u + v * v);
            }
        }
        return w;
    };
    if (geom.kind() == GeometryKind::Fan2D) return block(geom.params().sdd);

    std::vector<double> out;
    out.reserve(geom.measurement_count());
    for (std::size_t k = 0; k < geom.n_angles(); ++k) {
        const auto w = block(geom.effective_sdd(k));
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

double classical_scale(const Geometry& geom) {
    const double m = static_cast<double>(geom.n_angles());
    const double s = geom.voxel_size();
    if (!geom.is_3d()) return kPi / (2.0 * m * s * s);
    const auto& p = geom.params();
    const double phi = p.tilt_phi * kPi / 180.0;
    return std::cos(phi) * kPi * p.det_pixel_size * p.sod / (2.0 * m * s * s * s * p.sdd);
}

FilterParams classical_params(const Geometry& geom, ClassicalFilter kind) {
    FilterParams p = FilterParams::zeros(geom);
    const double scale = classical_scale(geom);
    const std::size_t cols = geom.det_cols();
    const auto gains = classical_filter(kind, cols);
    const std::size_t h = half_length(cols);
    const std::size_t blocks = p.per_angle() ? geom.n_angles() : 1;
    const std::size_t half_rows = geom.is_3d() ? half_length(geom.det_rows()) : 1;
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t r = 0; r < half_rows; ++r)
            for (std::size_t c = 0; c < h; ++c)
                p.filter[(b * half_rows + r) * h + c] = scale * gains[c];
    if (p.has_weights()) p.weight = standard_weights(geom);
    return p;
}

// ---------------------------------------------------------------------------
// FilterEngine

FilterEngine::FilterEngine(const Geometry& geom)
    : geom_(geom), spectrum_(geom.det_shape()), real_(geom.pixels_per_angle()),
      spec_a_(geom.pixels_per_angle()), spec_b_(geom.pixels_per_angle()) {}

void FilterEngine::apply(const FilterParams& p, std::span<const double> y,
                         std::span<double> out) {
    const std::size_t per = geom_.pixels_per_angle();
    require(y.size() == geom_.measurement_count() && out.size() == y.size(),
            "apply_B: stack size mismatch");
    std::vector<double> gains;
    if (!p.per_angle()) gains = p.full_filter(0);
    for (std::size_t k = 0; k < geom_.n_angles(); ++k) {
        if (p.per_angle()) gains = p.full_filter(k);
        const auto yk = y.subspan(k * per, per);
        if (p.has_weights()) {
            const auto w = p.weight_block(k);
            for (std::size_t i = 0; i < per; ++i) real_[i] = w[i] * yk[i];
        } else {
            std::copy(yk.begin(), yk.end(), real_.begin());
        }
        spectrum_.forward(real_, spec_a_);
        for (std::size_t i = 0; i < per; ++i) spec_a_[i] *= gains[i];
        spectrum_.inverse(spec_a_, out.subspan(k * per, per));
    }
}

void FilterEngine::accumulate_gradient(const FilterParams& p, std::span<const double> y,
                                       std::span<const double> g, FilterParams& grad) {
    const std::size_t per = geom_.pixels_per_angle();
    const double inv_len = 1.0 / static_cast<double>(per);
    std::vector<double> gains, full_grad(per);
    if (!p.per_angle()) gains = p.full_filter(0);
    const std::size_t block = p.filter_block();

    for (std::size_t k = 0; k < geom_.n_angles(); ++k) {
        if (p.per_angle()) gains = p.full_filter(k);
        const auto yk = y.subspan(k * per, per);
        const auto gk = g.subspan(k * per, per);
        // U = F(w * y), G = F(g)
        if (p.has_weights()) {
            const auto w = p.weight_block(k);
            for (std::size_t i = 0; i < per; ++i) real_[i] = w[i] * yk[i];
        } else {
            std::copy(yk.begin(), yk.end(), real_.begin());
        }
        spectrum_.forward(real_, spec_a_);
        spectrum_.forward(gk, spec_b_);

        for (std::size_t i = 0; i < per; ++i)
            full_grad[i] = inv_len * (std::conj(spec_b_[i]) * spec_a_[i]).real();
        const std::size_t offset = p.per_angle() ? k * block : 0;
        fold_gradient(full_grad, p.det_shape,
                      std::span<double>(grad.filter).subspan(offset, block));

        if (p.has_weights()) {
            for (std::size_t i = 0; i < per; ++i) spec_b_[i] *= gains[i];
            spectrum_.inverse(spec_b_, real_);
            const std::size_t woff = p.per_angle() ? k * per : 0;
            for (std::size_t i = 0; i < per; ++i) grad.weight[woff + i] += yk[i] * real_[i];
        }
    }
}

ProjectionStack apply_B(const FilterParams& params, const Geometry& geom,
                        const ProjectionStack& stack) {
    params.check_against(geom);
    require(stack.shape == geom.stack_shape(), "apply_B: stack shape mismatch");
    ProjectionStack out(stack.shape);
    FilterEngine engine(geom);
    engine.apply(params, stack.data, out.data);
    return out;
}

VolumeImage reconstruct(const FilterParams& params, const Geometry& geom,
                        const ProjectionStack& stack) {
    return back_project(geom, apply_B(params, geom, stack));
}

FilterParams gauge_normalize(const FilterParams& params, const Geometry& geom) {
    params.check_against(geom);
    require(params.has_weights(), "gauge normalization needs weights");
    const auto ref = standard_weights(geom);
    const double s = dot(params.weight, ref) / dot(ref, ref);
    if (s == 0.0 || !std::isfinite(s))
        throw NumericalError("degenerate weights: zero projection onto the standard profile");
    FilterParams out = params;
    for (double& w : out.weight) w /= s;
    for (double& f : out.filter) f *= s;
    return out;
}

} // namespace learnfbp
