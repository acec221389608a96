#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "learnfbp/filters.hpp"
#include "learnfbp/phantom.hpp"

namespace learnfbp {

enum class FilterInit { Ramp, Ones, Zeros };

std::string to_string(FilterInit init);
FilterInit filter_init_from_string(const std::string& name);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    bool operator==(const AdamConfig&) const = default;
};

struct TrainConfig {
    double lambda = 0.0;
    double lr = 1e-2;
    /// Step size for p_weight; defaults to `lr`.
    std::optional<double> lr_weight;
    std::size_t n_iters = 100;
    /// Unset means full batch.
    std::optional<std::size_t> batch_size;
    std::uint64_t seed = 0;
    AdamConfig adam;
    FilterInit init = FilterInit::Ramp;

    void validate(std::size_t dataset_size) const;
    bool operator==(const TrainConfig&) const = default;
};

struct LossRecord {
    double data = 0.0;
    double penalty = 0.0;
};

struct TrainReport {
    std::vector<LossRecord> history;
    FilterParams params;
    double wall_seconds = 0.0;
};

struct PenaltyValue {
    double value = 0.0;
    FilterParams grad;
};

/**
 * rho(p) = ||L_freq p_filter||^2 + ||L_space p_weight||^2 with forward
 * differences inside each angle block: along the half-spectrum axes for the
 * filter and along the detector axes for the weights. No wrap, no
 * cross-angle differences.
 */
PenaltyValue smoothness_penalty(const FilterParams& params);

struct LossGrad {
    double data = 0.0;
    double penalty = 0.0;
    double total = 0.0;
    FilterParams grad;
};

/**
 * Mean over the batch of ||A^T B(p) y_i - x_i||^2 plus lambda * rho(p), with
 * the gradient obtained through the adjoint chain:
 * r = A^T B y - x, s = A r, then the spectral/weight products in FilterEngine.
 */
LossGrad loss_and_grad(const FilterParams& params, const Geometry& geom,
                       const Dataset& data, std::span<const std::size_t> batch,
                       double lambda);
LossGrad loss_and_grad(const FilterParams& params, const Geometry& geom,
                       const Dataset& data, double lambda);

/// Ramp: classical_params(RamLak); Ones/Zeros: constant filter. Weights start standard.
FilterParams initial_params(const Geometry& geom, FilterInit init);

/// Adam on the data term plus lambda * rho; deterministic given the config.
TrainReport train(const TrainConfig& config, const Geometry& geom, const Dataset& data);
TrainReport train(const TrainConfig& config, const Geometry& geom, const Dataset& data,
                  FilterParams init);

/**
 * Quadratic model of the filter-only (Parallel2D) loss: for each sample the
 * reconstruction is linear in p_filter, so the data term equals
 * p^T G_i p - 2 b_i^T p + c_i. Built once, it makes every training step
 * O(h^2) instead of two projections per sample.
 */
class FilterResponseCache {
  public:
    FilterResponseCache(const Geometry& geom, const Dataset& data);

    /// Same contract as loss_and_grad for Parallel2D parameters.
    LossGrad evaluate(const FilterParams& params, std::span<const std::size_t> batch,
                      double lambda) const;

  private:
    std::vector<Eigen::MatrixXd> gram_;
    std::vector<Eigen::VectorXd> cross_;
    std::vector<double> energy_;
};

struct UnstructuredOptions {
    std::size_t max_iters = 50000;
    /// Stop when ||grad|| <= tolerance * ||grad at B = 0||.
    double tolerance = 1e-9;
};

struct UnstructuredResult {
    Eigen::MatrixXd B;
    std::size_t iterations = 0;
    double relative_gradient = 0.0;
    std::vector<double> objective;
};

/**
 * Learns a full M x M operator B by accelerated gradient descent on
 * K^-1 sum ||A^T B y_i - x_i||^2 + lambda ||B||_F^2, with A and A^T applied
 * through the projector. Stationary point: A A^T B S_yy + lambda B = A S_xy.
 */
UnstructuredResult train_unstructured(const Geometry& geom, const Dataset& data,
                                      double lambda, const UnstructuredOptions& options = {});

} // namespace learnfbp
