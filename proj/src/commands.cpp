#include "learnfbp/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "learnfbp/errors.hpp"
#include "learnfbp/io.hpp"
#include "learnfbp/oracle.hpp"
#include "learnfbp/parallel.hpp"
#include "learnfbp/rng.hpp"

namespace learnfbp {

namespace {

void guard_output(const fs::path& path, bool force) {
    if (fs::exists(path) && !force)
        throw IoError(path.string() + " already exists (use --force to overwrite)");
}

std::string csv_number(double v) {
    std::ostringstream ss;
    ss << std::setprecision(12) << v;
    return ss.str();
}

void write_loss_csv(const fs::path& path, const TrainReport& report, double lambda) {
    std::ostringstream ss;
    ss << "iteration,data,penalty,total\n" << std::setprecision(17);
    for (std::size_t i = 0; i < report.history.size(); ++i) {
        const auto& r = report.history[i];
        ss << i << ',' << r.data << ',' << r.penalty << ',' << r.data + lambda * r.penalty << '\n';
    }
    write_text(path, ss.str());
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Random rng(derive_seed(seed, 0, "oracle"));
    Matrix A(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
    // unit spectral norm, comparable to the lambda grid
    return A / Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
}

// Sxx' = I + eps * G G^T / N with Gaussian G.
MomentModel perturbed_model(std::size_t n, double sigma, double eps, std::uint64_t seed) {
    Random rng(derive_seed(seed, 1, "oracle"));
    const auto nn = static_cast<Eigen::Index>(n);
    Matrix G(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i)
        for (Eigen::Index j = 0; j < nn; ++j) G(i, j) = rng.normal();
    Matrix s = Matrix::Identity(nn, nn) + eps * G * G.transpose() / static_cast<double>(n);
    return {0.5 * (s + s.transpose()), sigma * sigma};
}

std::string stem_sibling(const fs::path& out, const std::string& suffix) {
    return (out.parent_path() / (out.stem().string() + suffix + ".csv")).string();
}

void write_filter_csv(const fs::path& out, const FilterParams& p) {
    std::ostringstream ss;
    const Shape half = p.half_shape();
    const std::size_t blocks = p.per_angle() ? p.n_angles : 1;
    if (half.size() == 1) {
        ss << "angle,bin,frequency,gain\n";
        for (std::size_t a = 0; a < blocks; ++a) {
            const auto f = p.filter_block(a);
            for (std::size_t k = 0; k < half[0]; ++k)
                ss << a << ',' << k << ','
                   << csv_number(static_cast<double>(k) / static_cast<double>(p.det_shape[0]))
                   << ',' << csv_number(f[k]) << '\n';
        }
    } else {
        ss << "angle,bin_v,bin_u,frequency_v,frequency_u,gain\n";
        for (std::size_t a = 0; a < blocks; ++a) {
            const auto f = p.filter_block(a);
            for (std::size_t r = 0; r < half[0]; ++r)
                for (std::size_t c = 0; c < half[1]; ++c)
                    ss << a << ',' << r << ',' << c << ','
                       << csv_number(static_cast<double>(r) / static_cast<double>(p.det_shape[0]))
                       << ','
                       << csv_number(static_cast<double>(c) / static_cast<double>(p.det_shape[1]))
                       << ',' << csv_number(f[r * half[1] + c]) << '\n';
        }
    }
    write_text(out, ss.str());
}

void write_weight_csv(const fs::path& out, const FilterParams& p) {
    std::ostringstream ss;
    const std::size_t blocks = p.per_angle() ? p.n_angles : 1;
    const std::size_t cols = p.det_shape.back();
    ss << "angle,row,col,weight\n";
    for (std::size_t a = 0; a < blocks; ++a) {
        const auto w = p.weight_block(a);
        for (std::size_t i = 0; i < w.size(); ++i)
            ss << a << ',' << i / cols << ',' << i % cols << ',' << csv_number(w[i]) << '\n';
    }
    write_text(out, ss.str());
}

} // namespace

void cmd_gen_data(const ExperimentConfig& config, const fs::path& out, bool force) {
    config.validate();
    guard_output(out / "train", force);
    guard_output(out / "val", force);
    const Geometry geom = make_geometry(config.geometry);
    fs::create_directories(out);
    if (force) {
        fs::remove_all(out / "train");
        fs::remove_all(out / "val");
    }
    write_dataset(out / "train", make_train_set(config, geom));
    if (config.dataset.val_size > 0) write_dataset(out / "val", make_val_set(config, geom));
    write_text(out / "config.json", dump_config(config));
}

TrainReport cmd_train(const ExperimentConfig& config, const fs::path& out, bool force) {
    config.validate();
    guard_output(out / "params.json", force);
    const Geometry geom = make_geometry(config.geometry);
    const Dataset train_set = read_dataset(out / "train");
    TrainReport report = train(config.train, geom, train_set);
    write_params(out / "params.json", report.params);
    write_loss_csv(out / "loss.csv", report, config.train.lambda);
    return report;
}

void cmd_reconstruct(const GeometryParams& geometry, const fs::path& params,
                     const fs::path& stack, const fs::path& out, bool force) {
    guard_output(out, force);
    const Geometry geom = make_geometry(geometry);
    const FilterParams p = read_params(params);
    p.check_against(geom);
    const ProjectionStack y = read_stack(stack);
    require(y.shape == geom.stack_shape(), "stack shape " + shape_string(y.shape) +
                                               " does not match geometry " +
                                               shape_string(geom.stack_shape()));
    write_volume(out, reconstruct(p, geom, y));
}

std::map<std::string, MetricReport> cmd_eval(const ExperimentConfig& config, const fs::path& out,
                                             const std::vector<std::string>& methods,
                                             bool force) {
    config.validate();
    require(!methods.empty(), "no evaluation methods given");
    for (const auto& m : methods)
        guard_output(out / ("metrics_" + m + ".csv"), force);
    const Geometry geom = make_geometry(config.geometry);
    const Dataset val = read_dataset(out / "val");
    std::map<std::string, MetricReport> reports;
    for (const auto& m : methods) {
        MetricReport r;
        if (m == "learned") {
            const fs::path pp = out / "params.json";
            if (!fs::exists(pp)) throw IoError("learned parameters not found at " + pp.string());
            const FilterParams p = read_params(pp);
            r = evaluate([&](const ProjectionStack& y) { return reconstruct(p, geom, y); }, geom,
                         val);
        } else if (m == "classical") {
            r = evaluate(
                [&](const ProjectionStack& y) {
                    return classical_reconstruct(geom, y, config.eval.classical_filter);
                },
                geom, val);
        } else if (m == "nag") {
            r = evaluate(
                [&](const ProjectionStack& y) {
                    return nag_least_squares(geom, y, config.eval.nag_iters);
                },
                geom, val);
        } else if (m == "truth") {
            std::size_t next = 0;
            r = evaluate([&](const ProjectionStack&) { return val.x[next++]; }, geom, val);
        } else {
            throw ValidationError("unknown evaluation method '" + m + "'");
        }
        std::ostringstream ss;
        r.write_csv(ss);
        write_text(out / ("metrics_" + m + ".csv"), ss.str());
        reports.emplace(m, std::move(r));
    }
    return reports;
}

void cmd_export_filter(const fs::path& params, const fs::path& out,
                       const std::optional<GeometryParams>& gauge_geometry, bool force) {
    const FilterParams p = read_params(params);
    guard_output(out, force);
    write_filter_csv(out, p);
    if (p.has_weights()) write_weight_csv(stem_sibling(out, "_weights"), p);
    if (gauge_geometry) {
        require(p.has_weights(), "gauge normalization needs weight parameters");
        const Geometry geom = make_geometry(*gauge_geometry);
        const FilterParams g = gauge_normalize(p, geom);
        write_filter_csv(stem_sibling(out, "_gauge"), g);
        write_weight_csv(stem_sibling(out, "_gauge_weights"), g);
    }
}

namespace {

struct OracleArgs {
    std::size_t rows = 8;
    std::size_t cols = 12;
    std::uint64_t seed = 0;
    double sigma = 0.1;
    double lambda = 0.1;
    std::vector<double> lambdas{0.1, 1.0, 10.0};
    double perturbation = 0.5;
};

void oracle_spectral(const OracleArgs& a, const fs::path& out, bool force) {
    guard_output(out, force);
    const auto f = spectral_factors(random_matrix(a.rows, a.cols, a.seed), a.sigma, a.lambda);
    std::ostringstream ss;
    ss << "i,sigma_i,H_ii,zeta_i,beta_i\n" << std::setprecision(17);
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const auto& r = f.rows[i];
        ss << i << ',' << r.singular_value << ',' << r.gain << ',' << r.zeta << ',' << r.beta
           << '\n';
    }
    ss << "variance," << f.variance << ",,,\nbias," << f.bias << ",,,\n";
    write_text(out, ss.str());
}

void oracle_stability(const OracleArgs& a, const fs::path& out, bool force) {
    guard_output(out, force);
    const Matrix A = random_matrix(a.rows, a.cols, a.seed);
    const MomentModel pi{Matrix::Identity(A.cols(), A.cols()), a.sigma * a.sigma};
    const MomentModel pi2 = perturbed_model(a.cols, a.sigma, a.perturbation, a.seed);
    const auto table = stability_probe(A, pi, pi2, a.lambdas);
    std::ostringstream ss;
    ss << "lambda,gap,w2\n" << std::setprecision(17);
    for (const auto& r : table.rows) ss << r.lambda << ',' << r.gap << ',' << table.w2 << '\n';
    write_text(out, ss.str());
}

void oracle_decomposition(const OracleArgs& a, const fs::path& out, bool force) {
    guard_output(out, force);
    const Matrix A = random_matrix(a.rows, a.cols, a.seed);
    const MomentModel model{Matrix::Identity(A.cols(), A.cols()), a.sigma * a.sigma};
    const Matrix B = solve_optimal_B(A, model, a.lambda);
    const auto d = error_decomposition(A, B, model);
    std::ostringstream ss;
    ss << "term,value\n" << std::setprecision(17) << "variance," << d.variance << "\nbias,"
       << d.bias << "\nnullspace," << d.nullspace << "\ncross," << d.cross << "\ntotal,"
       << d.total << '\n';
    write_text(out, ss.str());
}

// Dense optimal operator for an experiment's training set (empirical moments).
void oracle_solve(const ExperimentConfig& config, const fs::path& dir, double lambda,
                  const fs::path& out, bool force, std::ostream& log) {
    guard_output(out, force);
    const Geometry geom = make_geometry(config.geometry);
    const DenseOperator op = materialize(geom);
    const Dataset train_set = read_dataset(dir / "train");
    const auto mom = empirical_moments(train_set);
    const Matrix B = solve_optimal_B(op.A, mom.syy, mom.sxy, lambda);
    const double res = optimality_residual(op.A, B, mom.syy, mom.sxy, lambda);
    std::vector<double> data(static_cast<std::size_t>(B.size()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        data.data(), B.rows(), B.cols()) = B;
    write_tensor(out, {{static_cast<std::size_t>(B.rows()), static_cast<std::size_t>(B.cols())},
                       "operator",
                       DType::F64,
                       {{"lambda", lambda}, {"residual", res}},
                       data});
    log << "relative residual " << res / (op.A * mom.sxy).norm() << '\n';
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Learned filtered back projection for tomography"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    bool force = false;
    int threads = 0;
    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config_path, "experiment config (JSON)");
        if (needs_config) opt->required();
        sub->add_option("--out", out_dir, "output directory (defaults to config output_dir)");
        sub->add_flag("--force", force, "overwrite existing outputs");
        sub->add_option("--threads", threads, "worker threads (0 keeps the default)")
            ->check(CLI::NonNegativeNumber);
    };

    auto* gen = app.add_subcommand("gen-data", "generate training and validation data");
    common(gen, true);

    bool resume = false;
    auto* tr = app.add_subcommand("train", "learn filter parameters");
    common(tr, true);
    tr->add_flag("--resume", resume, "not supported");

    std::string params_path, stack_path, volume_path;
    auto* rec = app.add_subcommand("reconstruct", "apply learned parameters to one stack");
    common(rec, true);
    rec->add_option("--params", params_path, "params manifest")->required();
    rec->add_option("--stack", stack_path, "projection stack header")->required();
    rec->add_option("--volume", volume_path, "output volume header")->required();

    std::vector<std::string> methods;
    auto* ev = app.add_subcommand("eval", "score methods on the validation set");
    common(ev, true);
    ev->add_option("--method", methods, "learned, classical, nag, truth");

    OracleArgs oa;
    std::string oracle_csv;
    auto* orc = app.add_subcommand("oracle", "dense closed-form studies");
    orc->require_subcommand(1);
    auto oracle_sub = [&](const std::string& name, const std::string& help) {
        auto* s = orc->add_subcommand(name, help);
        common(s, false);
        s->add_option("--rows", oa.rows, "rows of the random A");
        s->add_option("--cols", oa.cols, "columns of the random A");
        s->add_option("--seed", oa.seed, "seed of the random A");
        s->add_option("--sigma", oa.sigma, "noise standard deviation");
        s->add_option("--lambda", oa.lambda, "regularization weight");
        s->add_option("--csv", oracle_csv, "output file");
        return s;
    };
    auto* o_spec = oracle_sub("spectral", "per-mode gains of the optimal operator");
    auto* o_stab = oracle_sub("stability", "optimal operator gap between two models");
    o_stab->add_option("--lambdas", oa.lambdas, "lambda grid")->delimiter(',');
    o_stab->add_option("--perturbation", oa.perturbation, "size of the covariance perturbation");
    auto* o_dec = oracle_sub("decomposition", "variance/bias/nullspace split");
    auto* o_solve = oracle_sub("solve", "dense optimal operator for the training set");

    bool gauge = false;
    auto* ex = app.add_subcommand("export-filter", "write parameters as CSV");
    common(ex, false);
    ex->add_option("--params", params_path, "params manifest")->required();
    ex->add_option("--csv", oracle_csv, "output CSV")->required();
    ex->add_flag("--gauge", gauge, "also write gauge-normalized parameters (needs --config)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (threads > 0) set_thread_count(threads);
        std::optional<ExperimentConfig> config;
        if (!config_path.empty()) config = load_config(config_path);
        const fs::path dir = !out_dir.empty() ? fs::path(out_dir)
                             : config      ? fs::path(config->output_dir)
                                           : fs::path(".");

        if (gen->parsed()) {
            cmd_gen_data(*config, dir, force);
            out << "wrote " << (dir / "train").string() << '\n';
        } else if (tr->parsed()) {
            if (resume)
                throw ValidationError("resuming is not supported: training has no checkpoints");
            const auto report = cmd_train(*config, dir, force);
            out << "final data loss " << report.history.back().data << '\n';
        } else if (rec->parsed()) {
            cmd_reconstruct(config->geometry, params_path, stack_path, volume_path, force);
        } else if (ev->parsed()) {
            if (methods.empty()) {
                methods = {"learned"};
                for (const auto& b : config->eval.baselines) methods.push_back(b);
            }
            for (const auto& [name, r] : cmd_eval(*config, dir, methods, force))
                out << name << ": mse " << r.mse_mean() << " +- " << r.mse_std() << ", ssim "
                    << r.ssim_mean() << " +- " << r.ssim_std() << '\n';
        } else if (orc->parsed()) {
            const fs::path csv = oracle_csv.empty() ? dir / "oracle.csv" : fs::path(oracle_csv);
            if (o_spec->parsed()) oracle_spectral(oa, csv, force);
            if (o_stab->parsed()) oracle_stability(oa, csv, force);
            if (o_dec->parsed()) oracle_decomposition(oa, csv, force);
            if (o_solve->parsed()) {
                if (!config) throw ValidationError("oracle solve needs --config");
                const fs::path target =
                    oracle_csv.empty() ? dir / "oracle_B.json" : fs::path(oracle_csv);
                oracle_solve(*config, dir, oa.lambda, target, force, out);
            }
        } else if (ex->parsed()) {
            if (gauge && !config) throw ValidationError("--gauge needs --config");
            cmd_export_filter(params_path, oracle_csv,
                              gauge ? std::optional<GeometryParams>(config->geometry)
                                    : std::nullopt,
                              force);
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace learnfbp
