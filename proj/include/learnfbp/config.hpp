#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "learnfbp/filters.hpp"
#include "learnfbp/geometry.hpp"
#include "learnfbp/phantom.hpp"
#include "learnfbp/training.hpp"

namespace learnfbp {

struct DatasetConfig {
    std::size_t train_size = 32;
    std::size_t val_size = 16;
    double snr_db = kNoiseless;
    /// Validation SNR; defaults to snr_db.
    std::optional<double> val_snr_db;
    std::uint64_t seed = 0;

    bool operator==(const DatasetConfig&) const = default;
};

struct EvalConfig {
    std::vector<std::string> metrics{"mse", "ssim"};
    std::vector<std::string> baselines{"classical", "nag"};
    ClassicalFilter classical_filter = ClassicalFilter::RamLak;
    std::size_t nag_iters = 100;

    bool operator==(const EvalConfig&) const = default;
};

/**
 * One experiment. The phantom shape always equals the geometry volume shape,
 * so the phantom block carries no shape of its own.
 */
struct ExperimentConfig {
    GeometryParams geometry;
    PhantomSpec phantom;
    DatasetConfig dataset;
    TrainConfig train;
    EvalConfig eval;
    std::string output_dir = "out";

    void validate() const;
    bool operator==(const ExperimentConfig&) const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& config);

/// Training and validation sets of an experiment.
Dataset make_train_set(const ExperimentConfig& config, const Geometry& geom);
Dataset make_val_set(const ExperimentConfig& config, const Geometry& geom);

} // namespace learnfbp
