#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "learnfbp/data.hpp"
#include "learnfbp/filters.hpp"
#include "learnfbp/geometry.hpp"
#include "learnfbp/phantom.hpp"

namespace learnfbp {

double mse(const VolumeImage& x, const VolumeImage& x_hat);

struct SsimOptions {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

/**
 * Mean SSIM over all fully contained Gaussian windows of a (rows, cols)
 * image, with the given data range.
 */
double ssim_2d(std::span<const double> x, std::span<const double> x_hat, std::size_t rows,
               std::size_t cols, double data_range, const SsimOptions& options = {});

/**
 * SSIM with data range max(x) - min(x) of the ground truth x. 3D volumes
 * are scored as the mean over axial slices, skipping slices where x is
 * constant. Constant ground truth throws.
 */
double ssim(const VolumeImage& x, const VolumeImage& x_hat, const SsimOptions& options = {});

/// Classical FBP (2D) or FDK (laminography) with the named window.
VolumeImage classical_reconstruct(const Geometry& geom, const ProjectionStack& stack,
                                  ClassicalFilter kind = ClassicalFilter::RamLak);

/// Largest eigenvalue of A^T A from `iters` power iterations started at ones.
double estimate_lipschitz(const Geometry& geom, std::size_t iters = 20);

/**
 * Accelerated gradient descent on 0.5 ||A x - y||^2 from x = 0 with step 1/L.
 * Uses the monotone variant: an iterate is only accepted if it does not
 * increase the objective, so residuals never grow. `residuals`, when given,
 * receives ||A x_k - y|| after every iteration.
 */
VolumeImage nag_least_squares(const Geometry& geom, const ProjectionStack& stack,
                              std::size_t n_iters, std::vector<double>* residuals = nullptr);

struct MetricReport {
    std::vector<double> mse;
    std::vector<double> ssim;

    std::size_t size() const { return mse.size(); }
    double mse_mean() const;
    double mse_std() const;
    double ssim_mean() const;
    double ssim_std() const;

    /// Columns sample,mse,ssim followed by mean and std rows.
    void write_csv(std::ostream& out) const;
};

/// Population mean and standard deviation.
double mean_of(std::span<const double> v);
double std_of(std::span<const double> v);

using Reconstructor = std::function<VolumeImage(const ProjectionStack&)>;

MetricReport evaluate(const Reconstructor& method, const Geometry& geom, const Dataset& data);

} // namespace learnfbp
