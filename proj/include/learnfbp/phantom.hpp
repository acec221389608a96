#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "learnfbp/data.hpp"
#include "learnfbp/geometry.hpp"

namespace learnfbp {

enum class PhantomKind { Circles2D, LayeredCircles3D };

std::string to_string(PhantomKind kind);
PhantomKind phantom_kind_from_string(const std::string& name);

/**
 * Random binary circle phantoms. Radii are fractions of the image width;
 * each circle lies fully inside the image. Overlaps stay at `value`.
 */
struct PhantomSpec {
    PhantomKind kind = PhantomKind::Circles2D;
    Shape shape;
    std::size_t min_circles = 3;
    std::size_t max_circles = 12;
    double min_radius = 0.02;
    double max_radius = 0.15;
    std::size_t n_layers = 3;  // LayeredCircles3D only
    double value = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Dataset pairs (x_i, y_i) on a shared geometry.
struct Dataset {
    std::vector<VolumeImage> x;
    std::vector<ProjectionStack> y;
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;

    std::size_t size() const { return x.size(); }
};

/// Sentinel for noiseless data.
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

VolumeImage generate_phantom(const PhantomSpec& spec, double voxel_size = 1.0);

/// Slice ranges [begin, end) of the layer bands for a volume of `slices`.
std::vector<std::pair<std::size_t, std::size_t>> layer_bands(std::size_t slices,
                                                             std::size_t n_layers);

/**
 * Adds i.i.d. Gaussian noise with sigma = rms(y) * 10^(-snr_db/20).
 * snr_db = +inf returns the stack unchanged; a zero stack with finite SNR throws.
 */
ProjectionStack add_gaussian_noise(const ProjectionStack& clean, double snr_db,
                                   std::uint64_t seed);

/// Noise sigma the above would use.
double noise_sigma(const ProjectionStack& clean, double snr_db);

/**
 * Sample i uses phantom seed derive_seed(seed, i, "phantom") and noise seed
 * derive_seed(seed, i, "noise"). spec.shape must match the geometry volume.
 */
Dataset make_dataset(const Geometry& geom, const PhantomSpec& spec, std::size_t count,
                     double snr_db, std::uint64_t seed);

} // namespace learnfbp
