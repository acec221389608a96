#include "learnfbp/phantom.hpp"

#include <cmath>

#include "learnfbp/errors.hpp"
#include "learnfbp/projector.hpp"
#include "learnfbp/rng.hpp"

namespace learnfbp {

std::string to_string(PhantomKind kind) {
    return kind == PhantomKind::Circles2D ? "Circles2D" : "LayeredCircles3D";
}

PhantomKind phantom_kind_from_string(const std::string& name) {
    for (auto k : {PhantomKind::Circles2D, PhantomKind::LayeredCircles3D})
        if (to_string(k) == name) return k;
    throw ValidationError("unknown phantom kind '" + name + "'");
}

void PhantomSpec::validate() const {
    const std::size_t rank = kind == PhantomKind::Circles2D ? 2 : 3;
    require(shape.size() == rank, "phantom shape has wrong rank");
    for (auto n : shape) require(n > 0, "phantom dimensions must be positive");
    require(min_circles <= max_circles, "circle count range is empty");
    require(min_radius > 0.0 && max_radius < 0.5 && min_radius <= max_radius,
            "radius range must satisfy 0 < min <= max < 0.5");
    if (kind == PhantomKind::LayeredCircles3D) {
        require(n_layers >= 1, "need at least one layer");
        require(2 * n_layers - 1 <= shape[0], "too many layers for the slice count");
    }
}

namespace {

// Draws one circle pattern into an (ny, nx) slice.
void draw_circles(const PhantomSpec& spec, Random& rng, std::size_t ny, std::size_t nx,
                  double* slice) {
    const auto count = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(spec.min_circles),
                        static_cast<std::int64_t>(spec.max_circles)));
    const double width = static_cast<double>(std::min(nx, ny));
    for (std::size_t c = 0; c < count; ++c) {
        const double r = width * rng.uniform(spec.min_radius, spec.max_radius);
        const double cx = rng.uniform(r, static_cast<double>(nx) - r);
        const double cy = rng.uniform(r, static_cast<double>(ny) - r);
        const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(cy - r)));
        const auto y1 = std::min(ny, static_cast<std::size_t>(std::ceil(cy + r)) + 1);
        const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(cx - r)));
        const auto x1 = std::min(nx, static_cast<std::size_t>(std::ceil(cx + r)) + 1);
        for (std::size_t iy = y0; iy < y1; ++iy) {
            const double dy = static_cast<double>(iy) + 0.5 - cy;
            for (std::size_t ix = x0; ix < x1; ++ix) {
                const double dx = static_cast<double>(ix) + 0.5 - cx;
                if (dx * dx + dy * dy <= r * r) slice[iy * nx + ix] = spec.value;
            }
        }
    }
}

} // namespace

std::vector<std::pair<std::size_t, std::size_t>> layer_bands(std::size_t slices,
                                                             std::size_t n_layers) {
    require(n_layers >= 1 && 2 * n_layers - 1 <= slices, "invalid layer layout");
    const std::size_t thick = slices / (2 * n_layers - 1);
    const std::size_t offset = (slices - thick * (2 * n_layers - 1)) / 2;
    std::vector<std::pair<std::size_t, std::size_t>> bands;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t begin = offset + 2 * l * thick;
        bands.emplace_back(begin, begin + thick);
    }
    return bands;
}

VolumeImage generate_phantom(const PhantomSpec& spec, double voxel_size) {
    spec.validate();
    VolumeImage vol(spec.shape, voxel_size);
    Random rng(spec.seed);
    if (spec.kind == PhantomKind::Circles2D) {
        draw_circles(spec, rng, spec.shape[0], spec.shape[1], vol.data.data());
        return vol;
    }
    const std::size_t ny = spec.shape[1], nx = spec.shape[2];
    const std::size_t plane = ny * nx;
    std::vector<double> pattern(plane);
    for (const auto& [begin, end] : layer_bands(spec.shape[0], spec.n_layers)) {
        std::fill(pattern.begin(), pattern.end(), 0.0);
        draw_circles(spec, rng, ny, nx, pattern.data());
        for (std::size_t z = begin; z < end; ++z)
            std::copy(pattern.begin(), pattern.end(), vol.data.begin() + z * plane);
    }
    return vol;
}

double noise_sigma(const ProjectionStack& clean, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    require(std::isfinite(snr_db), "snr_db must be finite or +inf");
    const double n = norm(clean.data);
    require(n > 0.0, "SNR is undefined for an all-zero projection stack");
    const double rms = n / std::sqrt(static_cast<double>(clean.size()));
    return rms * std::pow(10.0, -snr_db / 20.0);
}

ProjectionStack add_gaussian_noise(const ProjectionStack& clean, double snr_db,
                                   std::uint64_t seed) {
    require(all_finite(clean.data), "projection stack contains non-finite values");
    const double sigma = noise_sigma(clean, snr_db);
    ProjectionStack out = clean;
    if (sigma == 0.0) return out;
    Random rng(seed);
    for (double& v : out.data) v += sigma * rng.normal();
    return out;
}

Dataset make_dataset(const Geometry& geom, const PhantomSpec& spec, std::size_t count,
                     double snr_db, std::uint64_t seed) {
    require(count >= 1, "dataset needs at least one sample");
    require(spec.shape == geom.vol_shape(), "phantom shape " + shape_string(spec.shape) +
                                                " does not match geometry volume " +
                                                shape_string(geom.vol_shape()));
    Dataset ds;
    ds.snr_db = snr_db;
    ds.seed = seed;
    ds.x.reserve(count);
    ds.y.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        PhantomSpec s = spec;
        s.seed = derive_seed(seed, i, "phantom");
        auto x = generate_phantom(s, geom.voxel_size());
        auto clean = forward_project(geom, x);
        ds.y.push_back(add_gaussian_noise(clean, snr_db, derive_seed(seed, i, "noise")));
        ds.x.push_back(std::move(x));
    }
    return ds;
}

} // namespace learnfbp
