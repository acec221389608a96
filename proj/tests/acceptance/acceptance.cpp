// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "learnfbp/config.hpp"
#include "learnfbp/eval.hpp"
#include "learnfbp/io.hpp"
#include "learnfbp/oracle.hpp"
#include "learnfbp/parallel.hpp"
#include "learnfbp/projector.hpp"
#include "learnfbp/rng.hpp"
#include "learnfbp/training.hpp"
#include "support/oracles.hpp"

using namespace learnfbp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(const std::string& id, const std::string& name, const Outcome& o, double secs) {
    if (!o.pass) ++failures;
    std::printf("%-12s %s  %s: %s (%.1f s)\n", id.c_str(), o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
}

Outcome timed_limit(Outcome o, double secs, double limit) {
    if (secs >= limit) {
        o.pass = false;
        o.detail += fmt("; runtime %.1f s over the %.0f s budget", secs, limit);
    }
    return o;
}

// Bitwise digest of a run's numeric outputs.
struct Digest {
    std::uint64_t h = 14695981039346656037ULL;
    void add(std::span<const double> v) {
        h = fnv1a({reinterpret_cast<const unsigned char*>(v.data()), v.size() * sizeof(double)},
                  h);
    }
    void add(double v) { add(std::span<const double>(&v, 1)); }
    void add(const FilterParams& p) {
        add(p.filter);
        add(p.weight);
    }
    void add(const std::vector<LossRecord>& history) {
        for (const auto& r : history) {
            add(r.data);
            add(r.penalty);
        }
    }
};

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Random rng(seed);
    Matrix A(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = rng.normal();
    return A;
}

std::vector<double> uniform_vector(std::size_t n, std::uint64_t seed) {
    Random rng(seed);
    std::vector<double> v(n);
    for (double& e : v) e = rng.uniform(-1.0, 1.0);
    return v;
}

double mean_mse(const Dataset& val, const Reconstructor& method) {
    double s = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) s += mse(val.x[i], method(val.y[i]));
    return s / static_cast<double>(val.size());
}

// Window-10 moving average of the training objective must never go up.
std::size_t smoothed_increases(const std::vector<LossRecord>& h, double lambda) {
    std::vector<double> s;
    for (std::size_t i = 0; i + 10 <= h.size(); ++i) {
        double a = 0.0;
        for (std::size_t j = i; j < i + 10; ++j) a += h[j].data + lambda * h[j].penalty;
        s.push_back(a / 10.0);
    }
    std::size_t bad = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] > s[i - 1]) ++bad;
    return bad;
}

struct MonotoneLog {
    std::vector<std::string> runs;
    std::size_t violations = 0;
    void add(const std::string& name, const TrainReport& r, double lambda) {
        const std::size_t bad = smoothed_increases(r.history, lambda);
        violations += bad;
        runs.push_back(fmt("%s %zu", name.c_str(), bad));
    }
} monotone;

// ---------------------------------------------------------------------------
// desk-scale geometries

GeometryParams desk_2d(GeometryKind kind, std::size_t n, std::size_t d, std::size_t m) {
    GeometryParams p;
    p.kind = kind;
    p.n_angles = m;
    p.det_shape = {d};
    p.vol_shape = {n, n};
    p.vol_voxel_size = 1.0 / static_cast<double>(n);
    p.det_pixel_size = 1.6 / static_cast<double>(d);
    p.sod = 3.0;
    p.sdd = 6.0;
    if (kind != GeometryKind::Parallel2D) p.det_pixel_size = 3.2 / static_cast<double>(d);
    p.sod_major = 4.5;
    p.sdd_major = 8.0;
    return p;
}

// Parallel beam: detector spans 1.28 phantom widths, as 512 pixels over a
// 400-pixel phantom at equal pitch.
ExperimentConfig parallel_study_config(double snr) {
    ExperimentConfig c;
    c.geometry.kind = GeometryKind::Parallel2D;
    c.geometry.n_angles = 90;
    c.geometry.det_shape = {128};
    c.geometry.vol_shape = {64, 64};
    c.geometry.vol_voxel_size = 0.0125;
    c.geometry.det_pixel_size = 0.0125 * 64.0 * 1.28 / 128.0;
    c.dataset.train_size = 32;
    c.dataset.val_size = 16;
    c.dataset.snr_db = snr;
    c.dataset.seed = 1;
    c.train.lambda = 1e-3;
    c.train.lr = 1e-2;
    c.train.n_iters = 5000;
    return c;
}

ExperimentConfig elliptical_config() {
    ExperimentConfig c;
    c.geometry.kind = GeometryKind::EllipticalFan2D;
    c.geometry.n_angles = 90;
    c.geometry.det_shape = {96};
    c.geometry.vol_shape = {64, 64};
    c.geometry.vol_voxel_size = 2.0 / 64.0;
    c.geometry.det_pixel_size = 7.68 / 96.0;
    c.geometry.sod = 4.5;
    c.geometry.sdd = 9.0;
    c.geometry.sod_major = 12.0;
    c.geometry.sdd_major = 24.0;
    c.dataset.train_size = 32;
    c.dataset.val_size = 16;
    c.dataset.seed = 2;
    c.train.lambda = 1e-4;
    c.train.lr = 1e-2;
    c.train.n_iters = 500;
    return c;
}

ExperimentConfig laminography_config(double tilt) {
    ExperimentConfig c;
    c.geometry.kind = GeometryKind::Laminography3D;
    c.geometry.n_angles = 40;
    c.geometry.det_shape = {96, 96};
    c.geometry.vol_shape = {16, 64, 64};
    c.geometry.vol_voxel_size = 2.0 / 64.0;
    c.geometry.det_pixel_size = 10.24 / 96.0;
    c.geometry.sod = 5.0;
    c.geometry.sdd = 20.0;
    c.geometry.tilt_phi = tilt;
    c.phantom.kind = PhantomKind::LayeredCircles3D;
    c.dataset.train_size = 16;
    c.dataset.val_size = 8;
    c.dataset.seed = 3;
    c.train.lambda = 1e-4;
    c.train.lr = 3e-2;
    c.train.n_iters = 100;
    return c;
}

// ---------------------------------------------------------------------------
// 1-5: exact properties

Outcome adjoint_exactness() {
    std::vector<GeometryParams> gs{desk_2d(GeometryKind::Parallel2D, 64, 96, 60),
                                   desk_2d(GeometryKind::Fan2D, 64, 96, 60),
                                   desk_2d(GeometryKind::EllipticalFan2D, 64, 96, 60)};
    GeometryParams lam;
    lam.kind = GeometryKind::Laminography3D;
    lam.n_angles = 20;
    lam.det_shape = {64, 64};
    lam.vol_shape = {16, 48, 48};
    lam.vol_voxel_size = 1.0 / 48.0;
    lam.det_pixel_size = 4.0 / 64.0;
    lam.sod = 3.0;
    lam.sdd = 6.0;
    lam.tilt_phi = 45.0;
    gs.push_back(lam);

    double worst = 0.0;
    for (const auto& gp : gs) {
        const auto g = make_geometry(gp);
        std::vector<double> ax(g.measurement_count()), aty(g.voxel_count());
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto x = uniform_vector(g.voxel_count(), 100 + seed);
            const auto y = uniform_vector(g.measurement_count(), 200 + seed);
            forward_project(g, x, ax);
            back_project(g, y, aty);
            const double gap = std::abs(dot(ax, y) - dot(x, aty)) / (norm(ax) * norm(y));
            worst = std::max(worst, gap);
        }
    }
    return {worst <= 1e-6, fmt("worst |<Ax,y>-<x,A^T y>|/(|Ax||y|) = %.2e <= 1e-6", worst)};
}

Outcome spectral_closed_form() {
    const Matrix A = gaussian_matrix(16, 32, 7);
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU);
    const Matrix& U = svd.matrixU();
    const auto& s = svd.singularValues();
    double diag_err = 0.0, off_err = 0.0;
    for (double sigma : {0.0, 0.1, 1.0})
        for (double lambda : {0.0, 0.1, 1.0}) {
            if (sigma == 0.0 && lambda == 0.0) continue;
            const MomentModel model{Matrix::Identity(32, 32), sigma * sigma};
            const Matrix D = U.transpose() * solve_optimal_B(A, model, lambda) * U;
            for (Eigen::Index i = 0; i < 16; ++i)
                for (Eigen::Index j = 0; j < 16; ++j) {
                    if (i == j) {
                        const double s2 = s(i) * s(i);
                        const double h = s2 / ((s2 + sigma * sigma) * s2 + lambda);
                        diag_err = std::max(diag_err, std::abs(D(i, i) - h));
                    } else {
                        off_err = std::max(off_err, std::abs(D(i, j)));
                    }
                }
        }
    return {diag_err <= 1e-8 && off_err <= 1e-8,
            fmt("max diagonal error %.2e, max off-diagonal %.2e (both <= 1e-8)", diag_err,
                off_err)};
}

Outcome pseudo_inverse_limit() {
    const Matrix A = gaussian_matrix(16, 32, 8);
    const Matrix B = solve_optimal_B(A, MomentModel{Matrix::Identity(32, 32), 0.0}, 0.0);
    const Matrix ref = (A * A.transpose()).inverse();
    const double rel = (B - ref).norm() / ref.norm();
    return {rel <= 1e-8, fmt("||B*-(AA^T)^-1||_F/||(AA^T)^-1||_F = %.2e <= 1e-8", rel)};
}

Outcome decomposition_identity() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Matrix A = gaussian_matrix(16, 32, 30 + seed);
        const double sigma = 0.1 * static_cast<double>(seed + 1);
        const MomentModel model{Matrix::Identity(32, 32), sigma * sigma};
        const Matrix B = solve_optimal_B(A, model, 0.1);
        const auto d = error_decomposition(A, B, model);
        // E||A^T B y - x||^2 evaluated directly from the moments
        const Matrix T = A.transpose() * B;
        const Matrix E = T * A - Matrix::Identity(32, 32);
        const double total = (E * E.transpose()).trace() + sigma * sigma * T.squaredNorm();
        worst = std::max(worst, std::abs(d.variance + d.bias + d.nullspace - total) / total);
    }
    return {worst <= 1e-8, fmt("worst relative mismatch %.2e over 3 instances (<= 1e-8)", worst)};
}

Outcome gradient_correctness() {
    double worst = 0.0;
    std::string worst_kind;
    const std::vector<GeometryParams> kinds{
        desk_2d(GeometryKind::Parallel2D, 8, 8, 4), desk_2d(GeometryKind::Fan2D, 8, 8, 4),
        desk_2d(GeometryKind::EllipticalFan2D, 8, 8, 4), [] {
            GeometryParams p;
            p.kind = GeometryKind::Laminography3D;
            p.n_angles = 4;
            p.det_shape = {8, 8};
            p.vol_shape = {4, 8, 8};
            p.vol_voxel_size = 1.0 / 8.0;
            p.det_pixel_size = 0.5;
            p.sod = 3.0;
            p.sdd = 6.0;
            p.tilt_phi = 45.0;
            return p;
        }()};
    for (const auto& gp : kinds) {
        const auto g = make_geometry(gp);
        PhantomSpec spec;
        spec.kind = g.is_3d() ? PhantomKind::LayeredCircles3D : PhantomKind::Circles2D;
        spec.shape = g.vol_shape();
        spec.n_layers = 1;
        spec.min_radius = 0.1;
        spec.max_radius = 0.3;
        const auto ds = make_dataset(g, spec, 2, 25.0, 5);
        FilterParams p = classical_params(g, ClassicalFilter::RamLak);
        const auto jf = uniform_vector(p.filter.size(), 6);
        for (std::size_t i = 0; i < jf.size(); ++i) p.filter[i] = (p.filter[i] + 1.0) * (1.0 + 0.2 * jf[i]);
        const auto jw = uniform_vector(p.weight.size(), 7);
        for (std::size_t i = 0; i < jw.size(); ++i) p.weight[i] *= 1.0 + 0.2 * jw[i];
        const double lambda = 0.01;
        const auto lg = loss_and_grad(p, g, ds, lambda);

        // Relative error per entry; entries below 1e-3 of the largest are
        // measured against that floor (central differences at h = 1e-5 carry
        // eps*L/h of absolute rounding).
        auto check = [&](std::span<const double> analytic, std::vector<double> at, bool filter) {
            const auto fd = oracle::central_differences(
                [&](const std::vector<double>& v) {
                    FilterParams q = p;
                    (filter ? q.filter : q.weight) = v;
                    return loss_and_grad(q, g, ds, lambda).total;
                },
                std::move(at), 1e-5);
            double peak = 0.0;
            for (double v : fd) peak = std::max(peak, std::abs(v));
            const double e = oracle::max_relative_error(analytic, fd, 1e-3 * peak);
            if (e > worst) {
                worst = e;
                worst_kind = to_string(gp.kind) + (filter ? " filter" : " weight");
            }
        };
        check(lg.grad.filter, p.filter, true);
        if (p.has_weights()) check(lg.grad.weight, p.weight, false);
    }
    return {worst <= 1e-5,
            fmt("max relative error %.2e (%s) <= 1e-5", worst, worst_kind.c_str())};
}

// ---------------------------------------------------------------------------
// 6-12: learning runs. Each returns a digest for the determinism check.

struct Run {
    Outcome outcome;
    std::uint64_t digest = 0;
};

Run unstructured_vs_oracle() {
    ExperimentConfig c;
    c.geometry = desk_2d(GeometryKind::Fan2D, 12, 12, 6);
    c.dataset.train_size = 64;
    c.dataset.snr_db = 30.0;
    c.dataset.seed = 6;
    const double lambda = 0.1;
    const auto g = make_geometry(c.geometry);
    const auto data = make_train_set(c, g);
    const auto r = train_unstructured(g, data, lambda);
    const auto mom = empirical_moments(data);
    const Matrix B = solve_optimal_B(system_matrix(g), mom.syy, mom.sxy, lambda);
    const double gap = (r.B - B).norm() / B.norm();
    Digest d;
    d.add(std::span<const double>(r.B.data(), static_cast<std::size_t>(r.B.size())));
    return {{gap <= 1e-3, fmt("relative Frobenius gap %.2e <= 1e-3 after %zu iterations", gap,
                              r.iterations)},
            d.h};
}

struct ParallelStudy {
    std::vector<double> snrs{20.0, 25.0, 30.0};
    std::vector<FilterParams> params;        // by training SNR
    std::vector<Dataset> val;                // by validation SNR
    double fbp_mse_20 = 0.0, fbp_mse_20_equal_pitch = 0.0, learned_equal_pitch = 0.0;
    std::vector<std::vector<double>> grid;  // [train][val] MSE
    std::uint64_t digest = 0;
};

ParallelStudy run_parallel_study(bool log_monotone) {
    ParallelStudy s;
    Digest d;
    for (double snr : s.snrs) {
        const auto c = parallel_study_config(snr);
        const auto g = make_geometry(c.geometry);
        const auto report = train(c.train, g, make_train_set(c, g));
        if (log_monotone) monotone.add(fmt("parallel@%g", snr), report, c.train.lambda);
        d.add(report.history);
        d.add(report.params);
        s.params.push_back(report.params);
        s.val.push_back(make_val_set(c, g));
    }
    const auto g = make_geometry(parallel_study_config(20.0).geometry);
    for (const auto& p : s.params) {
        std::vector<double> row;
        for (const auto& v : s.val)
            row.push_back(mean_mse(v, [&](const ProjectionStack& y) { return reconstruct(p, g, y); }));
        d.add(row);
        s.grid.push_back(row);
    }
    s.fbp_mse_20 =
        mean_mse(s.val[0], [&](const ProjectionStack& y) { return classical_reconstruct(g, y); });
    d.add(s.fbp_mse_20);
    s.digest = d.h;
    return s;
}

// Same study at equal detector and voxel pitch; reported alongside criterion 7.
void equal_pitch_reference(ParallelStudy& s) {
    auto c = parallel_study_config(20.0);
    c.geometry.det_pixel_size = c.geometry.vol_voxel_size;
    const auto g = make_geometry(c.geometry);
    const auto p = train(c.train, g, make_train_set(c, g)).params;
    const auto v = make_val_set(c, g);
    s.learned_equal_pitch =
        mean_mse(v, [&](const ProjectionStack& y) { return reconstruct(p, g, y); });
    s.fbp_mse_20_equal_pitch =
        mean_mse(v, [&](const ProjectionStack& y) { return classical_reconstruct(g, y); });
}

Outcome noise_benefit(const ParallelStudy& s) {
    const double ratio = s.grid[0][0] / s.fbp_mse_20;
    std::string extra;
    if (s.fbp_mse_20_equal_pitch > 0.0)
        extra = fmt("; at equal detector/voxel pitch the ratio is %.3f",
                    s.learned_equal_pitch / s.fbp_mse_20_equal_pitch);
    return {ratio <= 0.5, fmt("learned %.3e vs RamLak FBP %.3e, ratio %.3f <= 0.5%s",
                              s.grid[0][0], s.fbp_mse_20, ratio, extra.c_str())};
}

double top_quartile_gain(const FilterParams& p) {
    const std::size_t h = p.filter.size();
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = h - h / 4; k < h; ++k, ++n) sum += p.filter[k];
    return sum / static_cast<double>(n);
}

Outcome filter_shape(const ParallelStudy& s) {
    const double g20 = top_quartile_gain(s.params[0]), g30 = top_quartile_gain(s.params[2]);
    return {g20 < g30, fmt("top-quartile mean gain SNR20 %.3f < SNR30 %.3f", g20, g30)};
}

Outcome matched_noise(const ParallelStudy& s) {
    std::size_t violations = 0;
    std::string cols;
    for (std::size_t v = 0; v < 3; ++v) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < 3; ++t)
            if (s.grid[t][v] < s.grid[best][v]) best = t;
        if (best != v) ++violations;
        cols += fmt(" val%g->train%g", s.snrs[v], s.snrs[best]);
    }
    return {violations <= 1, fmt("column minima:%s; %zu off-diagonal (<= 1 allowed)",
                                 cols.c_str(), violations)};
}

Run elliptical_improvement(bool log_monotone) {
    const auto c = elliptical_config();
    const auto g = make_geometry(c.geometry);
    const auto report = train(c.train, g, make_train_set(c, g));
    if (log_monotone) monotone.add("elliptical", report, c.train.lambda);
    const auto val = make_val_set(c, g);
    const double learned =
        mean_mse(val, [&](const ProjectionStack& y) { return reconstruct(report.params, g, y); });
    const double fbp =
        mean_mse(val, [&](const ProjectionStack& y) { return classical_reconstruct(g, y); });
    Digest d;
    d.add(report.history);
    d.add(report.params);
    d.add(learned);
    const double ratio = learned / fbp;
    return {{ratio <= 1.0 / 3.0,
             fmt("learned %.3e vs FBP %.3e, ratio %.3f <= 0.333", learned, fbp, ratio)},
            d.h};
}

struct LaminoStudy {
    FilterParams params;
    double learned_mse = 0, learned_ssim = 0, fdk_mse = 0, fdk_ssim = 0;
    std::vector<std::pair<double, double>> tilt_mse;
    std::uint64_t digest = 0;
};

LaminoStudy run_lamino_study(bool log_monotone) {
    LaminoStudy s;
    const auto c = laminography_config(45.0);
    const auto g = make_geometry(c.geometry);
    const auto report = train(c.train, g, make_train_set(c, g));
    if (log_monotone) monotone.add("laminography", report, c.train.lambda);
    s.params = report.params;
    const auto val = make_val_set(c, g);
    const auto n = static_cast<double>(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) {
        const auto learned = reconstruct(s.params, g, val.y[i]);
        const auto fdk = classical_reconstruct(g, val.y[i]);
        s.learned_mse += mse(val.x[i], learned) / n;
        s.learned_ssim += ssim(val.x[i], learned) / n;
        s.fdk_mse += mse(val.x[i], fdk) / n;
        s.fdk_ssim += ssim(val.x[i], fdk) / n;
    }
    Digest d;
    d.add(report.history);
    d.add(report.params);
    d.add(s.learned_mse);
    d.add(s.learned_ssim);
    for (double tilt : {40.0, 42.5, 47.5, 50.0}) {
        const auto ct = laminography_config(tilt);
        const auto gt = make_geometry(ct.geometry);
        const double m = mean_mse(make_val_set(ct, gt), [&](const ProjectionStack& y) {
            return reconstruct(s.params, gt, y);
        });
        d.add(m);
        s.tilt_mse.emplace_back(tilt, m);
    }
    s.digest = d.h;
    return s;
}

Outcome lamino_improvement(const LaminoStudy& s) {
    const double ratio = s.learned_mse / s.fdk_mse;
    return {ratio <= 0.8 && s.learned_ssim >= s.fdk_ssim,
            fmt("MSE %.3e vs FDK %.3e (ratio %.3f <= 0.8); SSIM %.3f vs FDK %.3f",
                s.learned_mse, s.fdk_mse, ratio, s.learned_ssim, s.fdk_ssim)};
}

Outcome angle_robustness(const LaminoStudy& s) {
    double worst = 1.0;
    std::string rows;
    for (const auto& [tilt, m] : s.tilt_mse) {
        worst = std::max(worst, m / s.learned_mse);
        rows += fmt(" %g:%.3f", tilt, m / s.learned_mse);
    }
    return {worst <= 1.5, fmt("MSE relative to 45 deg:%s (max %.3f <= 1.5)", rows.c_str(), worst)};
}

Outcome stability_scaling() {
    Matrix A = gaussian_matrix(16, 32, 13);
    A /= Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
    const MomentModel pi{Matrix::Identity(32, 32), 0.01};
    const Matrix G = gaussian_matrix(32, 32, 14);
    const MomentModel pi2{pi.sxx + 0.5 * G * G.transpose() / 32.0, 0.01};
    const std::vector<double> grid{0.1, 1.0, 10.0};
    const auto t = stability_probe(A, pi, pi2, grid);
    const auto same = stability_probe(A, pi, pi, grid);
    bool ok = true;
    for (std::size_t i = 1; i < grid.size(); ++i)
        ok = ok && t.rows[i].gap <= 1.05 * t.rows[i - 1].gap;
    double same_gap = 0.0;
    for (const auto& r : same.rows) same_gap = std::max(same_gap, r.gap);
    ok = ok && same_gap <= 1e-10;
    return {ok, fmt("gaps %.3e, %.3e, %.3e at lambda 0.1, 1, 10 (W2 %.3f); pi=pi' gap %.1e",
                    t.rows[0].gap, t.rows[1].gap, t.rows[2].gap, t.w2, same_gap)};
}

} // namespace

int main() {
    set_thread_count(thread_count());
    std::printf("learnfbp acceptance (threads: %d)\n", thread_count());

    auto run = [](const std::string& id, const std::string& name, auto&& fn, double limit = 0.0) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = seconds_since(t0);
        report(id, name, limit > 0.0 ? timed_limit(o, secs, limit) : o, secs);
    };

    run("criterion 1", "adjoint exactness", adjoint_exactness, 30.0);
    run("criterion 2", "spectral closed form", spectral_closed_form, 5.0);
    run("criterion 3", "pseudo-inverse limit", pseudo_inverse_limit);
    run("criterion 4", "error decomposition", decomposition_identity);
    run("criterion 5", "gradient correctness", gradient_correctness);

    std::uint64_t d6 = 0, d10 = 0;
    run("criterion 6", "unstructured training vs dense solve", [&] {
        const auto r = unstructured_vs_oracle();
        d6 = r.digest;
        return r.outcome;
    }, 120.0);

    ParallelStudy ps;
    auto t0 = std::chrono::steady_clock::now();
    bool ps_ok = true;
    std::string ps_error;
    try {
        ps = run_parallel_study(true);
        equal_pitch_reference(ps);
    } catch (const std::exception& e) {
        ps_ok = false;
        ps_error = e.what();
    }
    const double ps_secs = seconds_since(t0);
    auto from_study = [&](auto fn) {
        return [&, fn] { return ps_ok ? fn(ps) : Outcome{false, "exception: " + ps_error}; };
    };
    run("criterion 7", "parallel-beam noise benefit",
        [&] { return timed_limit(from_study(noise_benefit)(), ps_secs, 600.0); });
    run("criterion 8", "noise-adaptive filter shape", from_study(filter_shape));
    run("criterion 9", "matched-noise MSE ordering", from_study(matched_noise));

    run("criterion 10", "elliptical improvement", [&] {
        const auto r = elliptical_improvement(true);
        d10 = r.digest;
        return r.outcome;
    });

    LaminoStudy ls;
    bool ls_ok = true;
    std::string ls_error;
    try {
        ls = run_lamino_study(true);
    } catch (const std::exception& e) {
        ls_ok = false;
        ls_error = e.what();
    }
    run("criterion 11", "laminography improvement", [&] {
        return ls_ok ? lamino_improvement(ls) : Outcome{false, "exception: " + ls_error};
    });
    run("criterion 12", "angle robustness", [&] {
        return ls_ok ? angle_robustness(ls) : Outcome{false, "exception: " + ls_error};
    });

    run("criterion 13", "stability scaling", stability_scaling);

    run("criterion 14", "determinism of runs 6-12", [&] {
        std::string diff;
        if (unstructured_vs_oracle().digest != d6) diff += " 6";
        if (!ps_ok || run_parallel_study(false).digest != ps.digest) diff += " 7-9";
        if (elliptical_improvement(false).digest != d10) diff += " 10";
        if (!ls_ok || run_lamino_study(false).digest != ls.digest) diff += " 11-12";
        return Outcome{diff.empty(), diff.empty() ? "all reruns bitwise identical"
                                                  : "reruns differ:" + diff};
    });

    std::string runs;
    for (const auto& r : monotone.runs) runs += " " + r;
    report("property", "smoothed training loss non-increasing",
           {monotone.violations == 0 && !monotone.runs.empty(),
            "window-10 increases per run:" + runs},
           0.0);

    std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
