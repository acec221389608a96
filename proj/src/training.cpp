#include "learnfbp/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "learnfbp/errors.hpp"
#include "learnfbp/projector.hpp"
#include "learnfbp/rng.hpp"

namespace learnfbp {

std::string to_string(FilterInit init) {
    switch (init) {
    case FilterInit::Ramp: return "ramp";
    case FilterInit::Ones: return "ones";
    case FilterInit::Zeros: return "zeros";
    }
    return "?";
}

FilterInit filter_init_from_string(const std::string& name) {
    for (auto i : {FilterInit::Ramp, FilterInit::Ones, FilterInit::Zeros})
        if (to_string(i) == name) return i;
    throw ValidationError("unknown filter init '" + name + "'");
}

void TrainConfig::validate(std::size_t dataset_size) const {
    require(lambda >= 0.0, "lambda must be >= 0");
    require(lr > 0.0, "lr must be positive");
    require(!lr_weight || *lr_weight > 0.0, "lr_weight must be positive");
    require(n_iters >= 1, "n_iters must be >= 1");
    require(!batch_size || (*batch_size >= 1 && *batch_size <= dataset_size),
            "batch_size must lie in [1, K]");
    require(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0,
            "Adam betas must lie in [0, 1)");
    require(adam.eps > 0.0, "Adam eps must be positive");
}

// ---------------------------------------------------------------------------
// Penalty

namespace {

// Forward differences along every axis of each block of `dims`.
double difference_penalty(std::span<const double> v, std::size_t blocks, const Shape& dims,
                          std::span<double> grad) {
    const std::size_t block = element_count(dims);
    double total = 0.0;
    auto visit = [&](std::size_t i, std::size_t j) {
        const double d = v[j] - v[i];
        total += d * d;
        grad[j] += 2.0 * d;
        grad[i] -= 2.0 * d;
    };
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t o = b * block;
        if (dims.size() == 1) {
            for (std::size_t k = 0; k + 1 < dims[0]; ++k) visit(o + k, o + k + 1);
        } else {
            const std::size_t rows = dims[0], cols = dims[1];
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) {
                    const std::size_t i = o + r * cols + c;
                    if (c + 1 < cols) visit(i, i + 1);
                    if (r + 1 < rows) visit(i, i + cols);
                }
        }
    }
    return total;
}

} // namespace

PenaltyValue smoothness_penalty(const FilterParams& params) {
    PenaltyValue out;
    out.grad = params;
    std::fill(out.grad.filter.begin(), out.grad.filter.end(), 0.0);
    std::fill(out.grad.weight.begin(), out.grad.weight.end(), 0.0);
    const std::size_t blocks = params.per_angle() ? params.n_angles : 1;
    out.value = difference_penalty(params.filter, blocks, params.half_shape(), out.grad.filter);
    if (params.has_weights())
        out.value += difference_penalty(params.weight, blocks, params.det_shape, out.grad.weight);
    return out;
}

// ---------------------------------------------------------------------------
// Loss

namespace {

void check_dataset(const Geometry& geom, const Dataset& data) {
    require(data.size() >= 1, "dataset is empty");
    require(data.x.size() == data.y.size(), "dataset x/y counts differ");
    for (std::size_t i = 0; i < data.size(); ++i) {
        require(data.x[i].shape == geom.vol_shape(), "dataset volume shape mismatch");
        require(data.y[i].shape == geom.stack_shape(), "dataset stack shape mismatch");
    }
}

void add_penalty(LossGrad& out, const FilterParams& params, double lambda) {
    if (lambda > 0.0) {
        auto pen = smoothness_penalty(params);
        out.penalty = pen.value;
        for (std::size_t i = 0; i < out.grad.filter.size(); ++i)
            out.grad.filter[i] += lambda * pen.grad.filter[i];
        for (std::size_t i = 0; i < out.grad.weight.size(); ++i)
            out.grad.weight[i] += lambda * pen.grad.weight[i];
    } else {
        out.penalty = smoothness_penalty(params).value;
    }
    out.total = out.data + lambda * out.penalty;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

} // namespace

LossGrad loss_and_grad(const FilterParams& params, const Geometry& geom, const Dataset& data,
                       std::span<const std::size_t> batch, double lambda) {
    params.check_against(geom);
    check_dataset(geom, data);
    require(!batch.empty(), "batch is empty");
    require(lambda >= 0.0, "lambda must be >= 0");

    LossGrad out;
    out.grad = FilterParams::zeros(geom);
    FilterEngine engine(geom);
    const double scale = 1.0 / static_cast<double>(batch.size());
    std::vector<double> filtered(geom.measurement_count()), residual(geom.voxel_count()),
        reprojected(geom.measurement_count());

    for (std::size_t i : batch) {
        require(i < data.size(), "batch index out of range");
        const auto& y = data.y[i].data;
        const auto& x = data.x[i].data;
        engine.apply(params, y, filtered);
        back_project(geom, filtered, residual);
        double sq = 0.0;
        for (std::size_t v = 0; v < residual.size(); ++v) {
            residual[v] -= x[v];
            sq += residual[v] * residual[v];
        }
        out.data += scale * sq;
        forward_project(geom, residual, reprojected);
        for (double& s : reprojected) s *= 2.0 * scale;
        engine.accumulate_gradient(params, y, reprojected, out.grad);
    }
    add_penalty(out, params, lambda);
    return out;
}

LossGrad loss_and_grad(const FilterParams& params, const Geometry& geom, const Dataset& data,
                       double lambda) {
    const auto all = iota_indices(data.size());
    return loss_and_grad(params, geom, data, all, lambda);
}

// ---------------------------------------------------------------------------
// Cache for the filter-only parameterization

FilterResponseCache::FilterResponseCache(const Geometry& geom, const Dataset& data) {
    require(geom.kind() == GeometryKind::Parallel2D,
            "the response cache applies to filter-only parameters");
    check_dataset(geom, data);
    FilterParams basis = FilterParams::zeros(geom);
    const std::size_t h = basis.filter.size();
    const auto n = static_cast<Eigen::Index>(geom.voxel_count());
    FilterEngine engine(geom);
    std::vector<double> filtered(geom.measurement_count());
    Eigen::MatrixXd responses(n, static_cast<Eigen::Index>(h));

    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < h; ++j) {
            std::fill(basis.filter.begin(), basis.filter.end(), 0.0);
            basis.filter[j] = 1.0;
            engine.apply(basis, data.y[i].data, filtered);
            back_project(geom, filtered,
                         std::span<double>(responses.col(static_cast<Eigen::Index>(j)).data(),
                                           geom.voxel_count()));
        }
        const Eigen::Map<const Eigen::VectorXd> x(data.x[i].data.data(), n);
        gram_.push_back(responses.transpose() * responses);
        cross_.push_back(responses.transpose() * x);
        energy_.push_back(x.squaredNorm());
    }
}

LossGrad FilterResponseCache::evaluate(const FilterParams& params,
                                       std::span<const std::size_t> batch,
                                       double lambda) const {
    require(!batch.empty(), "batch is empty");
    const auto h = static_cast<Eigen::Index>(params.filter.size());
    require(!gram_.empty() && gram_[0].rows() == h, "parameters do not match the cache");
    const Eigen::Map<const Eigen::VectorXd> p(params.filter.data(), h);
    const double scale = 1.0 / static_cast<double>(batch.size());

    LossGrad out;
    out.grad = params;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(h);
    for (std::size_t i : batch) {
        require(i < gram_.size(), "batch index out of range");
        const Eigen::VectorXd gp = gram_[i] * p;
        out.data += scale * (p.dot(gp) - 2.0 * cross_[i].dot(p) + energy_[i]);
        grad += (2.0 * scale) * (gp - cross_[i]);
    }
    std::copy(grad.data(), grad.data() + h, out.grad.filter.begin());
    add_penalty(out, params, lambda);
    return out;
}

// ---------------------------------------------------------------------------
// Training

FilterParams initial_params(const Geometry& geom, FilterInit init) {
    FilterParams p = classical_params(geom, ClassicalFilter::RamLak);
    if (init == FilterInit::Ones) std::fill(p.filter.begin(), p.filter.end(), 1.0);
    if (init == FilterInit::Zeros) std::fill(p.filter.begin(), p.filter.end(), 0.0);
    return p;
}

TrainReport train(const TrainConfig& config, const Geometry& geom, const Dataset& data) {
    return train(config, geom, data, initial_params(geom, config.init));
}

TrainReport train(const TrainConfig& config, const Geometry& geom, const Dataset& data,
                  FilterParams params) {
    const auto start = std::chrono::steady_clock::now();
    check_dataset(geom, data);
    config.validate(data.size());
    params.check_against(geom);

    const std::size_t k = data.size();
    const std::size_t batch = config.batch_size.value_or(k);
    const bool full_batch = batch == k;

    std::optional<FilterResponseCache> cache;
    if (geom.kind() == GeometryKind::Parallel2D) cache.emplace(geom, data);

    const std::size_t nf = params.filter.size(), nw = params.weight.size();
    std::vector<double> m1(nf + nw, 0.0), m2(nf + nw, 0.0);
    const double lr_w = config.lr_weight.value_or(config.lr);
    const auto& adam = config.adam;

    std::vector<std::size_t> order = iota_indices(k);
    std::size_t cursor = k, epoch = 0;

    TrainReport report;
    report.history.reserve(config.n_iters);
    for (std::size_t it = 0; it < config.n_iters; ++it) {
        std::vector<std::size_t> indices;
        if (full_batch) {
            indices = order;
        } else {
            if (cursor + batch > k) {
                order = iota_indices(k);
                Random rng(derive_seed(config.seed, epoch++, "shuffle"));
                for (std::size_t i = k - 1; i > 0; --i)
                    std::swap(order[i], order[static_cast<std::size_t>(
                                            rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
                cursor = 0;
            }
            indices.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                           order.begin() + static_cast<std::ptrdiff_t>(cursor + batch));
            cursor += batch;
        }

        const LossGrad lg = cache ? cache->evaluate(params, indices, config.lambda)
                                  : loss_and_grad(params, geom, data, indices, config.lambda);
        if (!std::isfinite(lg.total))
            throw NumericalError("training diverged: non-finite loss at iteration " +
                                 std::to_string(it));
        report.history.push_back({lg.data, lg.penalty});

        const double t = static_cast<double>(it + 1);
        const double c1 = 1.0 - std::pow(adam.beta1, t);
        const double c2 = 1.0 - std::pow(adam.beta2, t);
        auto step = [&](std::vector<double>& p, const std::vector<double>& g, std::size_t off,
                        double lr) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                double& a = m1[off + i];
                double& b = m2[off + i];
                a = adam.beta1 * a + (1.0 - adam.beta1) * g[i];
                b = adam.beta2 * b + (1.0 - adam.beta2) * g[i] * g[i];
                p[i] -= lr * (a / c1) / (std::sqrt(b / c2) + adam.eps);
            }
        };
        step(params.filter, lg.grad.filter, 0, config.lr);
        step(params.weight, lg.grad.weight, nf, lr_w);
    }
    report.params = std::move(params);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// ---------------------------------------------------------------------------
// Unstructured operator

namespace {

// Largest eigenvalue of A A^T by power iteration through the projector.
double top_eigenvalue_aat(const Geometry& geom, std::size_t iters) {
    std::vector<double> v(geom.measurement_count(), 1.0), vol(geom.voxel_count());
    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        const double nv = norm(v);
        if (nv == 0.0) return 0.0;
        for (double& e : v) e /= nv;
        back_project(geom, v, vol);
        lambda = dot(vol, vol);  // <v, A A^T v>
        forward_project(geom, vol, v);
    }
    return lambda;
}

} // namespace

UnstructuredResult train_unstructured(const Geometry& geom, const Dataset& data, double lambda,
                                      const UnstructuredOptions& options) {
    check_dataset(geom, data);
    require(lambda > 0.0, "unstructured training needs lambda > 0");
    const auto m = static_cast<Eigen::Index>(geom.measurement_count());
    const auto n = static_cast<Eigen::Index>(geom.voxel_count());
    const auto k = static_cast<Eigen::Index>(data.size());

    Eigen::MatrixXd Y(m, k), X(n, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        Y.col(i) = Eigen::Map<const Eigen::VectorXd>(data.y[i].data.data(), m);
        X.col(i) = Eigen::Map<const Eigen::VectorXd>(data.x[i].data.data(), n);
    }
    const double inv_k = 1.0 / static_cast<double>(k);

    // J(B) and grad J(B) with A, A^T from the projector.
    Eigen::VectorXd col_m(m), col_n(n);
    auto objective_and_grad = [&](const Eigen::MatrixXd& B, Eigen::MatrixXd& grad) {
        const Eigen::MatrixXd BY = B * Y;
        Eigen::MatrixXd S(m, k);
        double j = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) {
            col_m = BY.col(i);
            back_project(geom, std::span<const double>(col_m.data(), m),
                         std::span<double>(col_n.data(), n));
            col_n -= X.col(i);
            j += col_n.squaredNorm();
            forward_project(geom, std::span<const double>(col_n.data(), n),
                            std::span<double>(col_m.data(), m));
            S.col(i) = col_m;
        }
        grad = (2.0 * inv_k) * S * Y.transpose() + (2.0 * lambda) * B;
        return inv_k * j + lambda * B.squaredNorm();
    };

    const double syy_top =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(inv_k * Y * Y.transpose(),
                                                       Eigen::EigenvaluesOnly)
            .eigenvalues()
            .maxCoeff();
    const double lip = 1.1 * 2.0 * (top_eigenvalue_aat(geom, 100) * syy_top + lambda);
    const double mu = 2.0 * lambda;
    const double momentum = (std::sqrt(lip) - std::sqrt(mu)) / (std::sqrt(lip) + std::sqrt(mu));

    UnstructuredResult out;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m), prev = B, look = B, grad;
    objective_and_grad(B, grad);
    const double g0 = grad.norm();
    for (std::size_t it = 0; it < options.max_iters; ++it) {
        const double j = objective_and_grad(look, grad);
        out.objective.push_back(j);
        out.relative_gradient = grad.norm() / g0;
        out.iterations = it + 1;
        if (!std::isfinite(j)) throw NumericalError("unstructured training diverged");
        if (out.relative_gradient <= options.tolerance) {
            B = look;
            break;
        }
        prev = B;
        B = look - grad / lip;
        look = B + momentum * (B - prev);
    }
    out.B = std::move(B);
    return out;
}

} // namespace learnfbp
