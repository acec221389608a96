#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "learnfbp/config.hpp"
#include "learnfbp/eval.hpp"
#include "learnfbp/training.hpp"

namespace learnfbp {

namespace fs = std::filesystem;

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitValidation = 2, kExitIo = 3, kExitNumerical = 4 };

/// Writes <out>/train, <out>/val and <out>/config.json.
void cmd_gen_data(const ExperimentConfig& config, const fs::path& out, bool force);

/// Trains on <out>/train; writes <out>/params.json (+ tensors) and <out>/loss.csv.
TrainReport cmd_train(const ExperimentConfig& config, const fs::path& out, bool force);

void cmd_reconstruct(const GeometryParams& geometry, const fs::path& params,
                     const fs::path& stack, const fs::path& out, bool force);

/**
 * Scores methods on <out>/val and writes <out>/metrics_<method>.csv.
 * Methods: learned (needs <out>/params.json), classical, nag, truth.
 */
std::map<std::string, MetricReport> cmd_eval(const ExperimentConfig& config, const fs::path& out,
                                             const std::vector<std::string>& methods, bool force);

/**
 * Gains as CSV at `out`; weights, when present, at <stem>_weights.csv.
 * With `gauge_geometry`, the gauge-normalized copies go to <stem>_gauge*.csv.
 */
void cmd_export_filter(const fs::path& params, const fs::path& out,
                       const std::optional<GeometryParams>& gauge_geometry, bool force);

/// Parses argv-style arguments (without the program name) and runs one command.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace learnfbp
