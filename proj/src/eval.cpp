#include "learnfbp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "learnfbp/errors.hpp"
#include "learnfbp/projector.hpp"

namespace learnfbp {

double mse(const VolumeImage& x, const VolumeImage& x_hat) {
    require(x.shape == x_hat.shape, "mse: shape mismatch " + shape_string(x.shape) + " vs " +
                                        shape_string(x_hat.shape));
    require(x.size() > 0, "mse: empty volume");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data[i] - x_hat.data[i];
        s += d * d;
    }
    return s / static_cast<double>(x.size());
}

namespace {

std::vector<double> gaussian_window(const SsimOptions& o) {
    std::vector<double> w(o.window);
    const double c = 0.5 * static_cast<double>(o.window - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < o.window; ++i) {
        const double t = static_cast<double>(i) - c;
        w[i] = std::exp(-t * t / (2.0 * o.sigma * o.sigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Valid-mode separable filtering: (rows, cols) -> (rows-k+1, cols-k+1).
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t rows,
                                 std::size_t cols, const std::vector<double>& w) {
    const std::size_t k = w.size(), orows = rows - k + 1, ocols = cols - k + 1;
    std::vector<double> tmp(rows * ocols, 0.0), out(orows * ocols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < ocols; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += w[j] * img[r * cols + c + j];
            tmp[r * ocols + c] = s;
        }
    for (std::size_t r = 0; r < orows; ++r)
        for (std::size_t c = 0; c < ocols; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += w[j] * tmp[(r + j) * ocols + c];
            out[r * ocols + c] = s;
        }
    return out;
}

std::pair<double, double> value_range(std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, *hi};
}

} // namespace

double ssim_2d(std::span<const double> x, std::span<const double> x_hat, std::size_t rows,
               std::size_t cols, double data_range, const SsimOptions& options) {
    require(x.size() == rows * cols && x_hat.size() == rows * cols, "ssim: size mismatch");
    require(options.window >= 1 && rows >= options.window && cols >= options.window,
            "ssim: image smaller than the window");
    require(data_range > 0.0, "ssim: data range must be positive");
    const auto w = gaussian_window(options);
    const std::size_t n = rows * cols;
    // Second moments are taken about the global means so that large offsets
    // do not cancel catastrophically.
    double off_a = 0.0, off_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        off_a += x[i];
        off_b += x_hat[i];
    }
    off_a /= static_cast<double>(n);
    off_b /= static_cast<double>(n);
    std::vector<double> a(n), b(n), aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = x[i] - off_a;
        b[i] = x_hat[i] - off_b;
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto da = filter_valid(a, rows, cols, w), db = filter_valid(b, rows, cols, w),
               e_aa = filter_valid(aa, rows, cols, w), e_bb = filter_valid(bb, rows, cols, w),
               e_ab = filter_valid(ab, rows, cols, w);
    const double c1 = std::pow(options.k1 * data_range, 2);
    const double c2 = std::pow(options.k2 * data_range, 2);
    double total = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double ma = da[i] + off_a, mb = db[i] + off_b;
        const double va = e_aa[i] - da[i] * da[i], vb = e_bb[i] - db[i] * db[i],
                     cov = e_ab[i] - da[i] * db[i];
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(da.size());
}

double ssim(const VolumeImage& x, const VolumeImage& x_hat, const SsimOptions& options) {
    require(x.shape == x_hat.shape, "ssim: shape mismatch");
    require(x.size() > 0, "ssim: empty volume");
    const auto [lo, hi] = value_range(x.data);
    require(hi > lo, "ssim: ground truth is constant");
    const double range = hi - lo;
    if (!x.is_3d()) return ssim_2d(x.data, x_hat.data, x.shape[0], x.shape[1], range, options);

    const std::size_t rows = x.shape[1], cols = x.shape[2], plane = rows * cols;
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t z = 0; z < x.shape[0]; ++z) {
        const std::span<const double> xs(x.data.data() + z * plane, plane);
        const std::span<const double> ys(x_hat.data.data() + z * plane, plane);
        const auto [slo, shi] = value_range(xs);
        if (!(shi > slo)) continue;
        total += ssim_2d(xs, ys, rows, cols, range, options);
        ++used;
    }
    return total / static_cast<double>(used);
}

VolumeImage classical_reconstruct(const Geometry& geom, const ProjectionStack& stack,
                                  ClassicalFilter kind) {
    return reconstruct(classical_params(geom, kind), geom, stack);
}

double estimate_lipschitz(const Geometry& geom, std::size_t iters) {
    require(iters >= 1, "power iteration count must be >= 1");
    std::vector<double> v(geom.voxel_count(), 1.0), proj(geom.measurement_count());
    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        const double nv = norm(v);
        if (nv == 0.0) return 0.0;
        for (double& e : v) e /= nv;
        forward_project(geom, v, proj);
        lambda = dot(proj, proj);
        back_project(geom, proj, v);
    }
    return lambda;
}

VolumeImage nag_least_squares(const Geometry& geom, const ProjectionStack& stack,
                              std::size_t n_iters, std::vector<double>* residuals) {
    require(n_iters >= 1, "n_iters must be >= 1");
    require(stack.shape == geom.stack_shape(), "stack shape does not match geometry");
    const std::size_t n = geom.voxel_count(), m = geom.measurement_count();
    const std::vector<double>& y = stack.data;
    const double lip = estimate_lipschitz(geom);
    VolumeImage out(geom.vol_shape(), geom.voxel_size());
    if (residuals) residuals->clear();
    if (lip == 0.0) return out;

    // x: accepted iterate, z: gradient step, q: extrapolated point; a* = A * (.)
    std::vector<double> x(n, 0.0), x_prev(n, 0.0), q(n, 0.0), z(n), grad(n);
    std::vector<double> ax(m, 0.0), ax_prev(m, 0.0), aq(m, 0.0), az(m), r(m);
    auto objective = [&](const std::vector<double>& a) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += (a[i] - y[i]) * (a[i] - y[i]);
        return s;
    };
    double fx = objective(ax);
    double t = 1.0;
    for (std::size_t it = 0; it < n_iters; ++it) {
        for (std::size_t i = 0; i < m; ++i) r[i] = aq[i] - y[i];
        back_project(geom, r, grad);
        for (std::size_t i = 0; i < n; ++i) z[i] = q[i] - grad[i] / lip;
        forward_project(geom, z, az);
        const double fz = objective(az);

        x_prev.swap(x);
        ax_prev.swap(ax);
        const bool take_z = fz <= fx;
        if (take_z) {
            x = z;
            ax = az;
            fx = fz;
        } else {
            x = x_prev;
            ax = ax_prev;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double cz = t / t_next, cm = (t - 1.0) / t_next;
        for (std::size_t i = 0; i < n; ++i)
            q[i] = x[i] + cz * (z[i] - x[i]) + cm * (x[i] - x_prev[i]);
        for (std::size_t i = 0; i < m; ++i)
            aq[i] = ax[i] + cz * (az[i] - ax[i]) + cm * (ax[i] - ax_prev[i]);
        t = t_next;
        if (residuals) residuals->push_back(std::sqrt(fx));
    }
    out.data = std::move(x);
    return out;
}

double mean_of(std::span<const double> v) {
    require(!v.empty(), "mean of empty sequence");
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
    const double mu = mean_of(v);
    double s = 0.0;
    for (double e : v) s += (e - mu) * (e - mu);
    return std::sqrt(s / static_cast<double>(v.size()));
}

double MetricReport::mse_mean() const { return mean_of(mse); }
double MetricReport::mse_std() const { return std_of(mse); }
double MetricReport::ssim_mean() const { return mean_of(ssim); }
double MetricReport::ssim_std() const { return std_of(ssim); }

void MetricReport::write_csv(std::ostream& out) const {
    out << "sample,mse,ssim\n" << std::setprecision(17);
    for (std::size_t i = 0; i < size(); ++i) out << i << ',' << mse[i] << ',' << ssim[i] << '\n';
    out << "mean," << mse_mean() << ',' << ssim_mean() << '\n';
    out << "std," << mse_std() << ',' << ssim_std() << '\n';
}

MetricReport evaluate(const Reconstructor& method, const Geometry& geom, const Dataset& data) {
    require(data.size() >= 1, "evaluate: dataset is empty");
    MetricReport report;
    for (std::size_t i = 0; i < data.size(); ++i) {
        require(data.y[i].shape == geom.stack_shape(), "evaluate: stack shape mismatch");
        const VolumeImage rec = method(data.y[i]);
        report.mse.push_back(mse(data.x[i], rec));
        report.ssim.push_back(ssim(data.x[i], rec));
    }
    return report;
}

} // namespace learnfbp
