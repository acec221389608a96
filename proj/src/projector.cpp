#include "learnfbp/projector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <omp.h>

#include "learnfbp/errors.hpp"
#include "learnfbp/parallel.hpp"

namespace learnfbp {

int thread_count() { return omp_get_max_threads(); }

void set_thread_count(int n) {
    require(n >= 1, "thread count must be >= 1");
    omp_set_num_threads(n);
}

namespace {

// Axes are (x, y, z); the volume is stored (z, y, x) so x is contiguous.
struct Grid {
    int n[3];
    std::ptrdiff_t stride[3];
    double center[3];
    double voxel;
};

Grid make_grid(const Geometry& geom) {
    const auto& s = geom.vol_shape();
    Grid g{};
    if (s.size() == 2) {
        g.n[0] = static_cast<int>(s[1]);
        g.n[1] = static_cast<int>(s[0]);
        g.n[2] = 1;
    } else {
        g.n[0] = static_cast<int>(s[2]);
        g.n[1] = static_cast<int>(s[1]);
        g.n[2] = static_cast<int>(s[0]);
    }
    g.stride[0] = 1;
    g.stride[1] = g.n[0];
    g.stride[2] = static_cast<std::ptrdiff_t>(g.n[0]) * g.n[1];
    for (int d = 0; d < 3; ++d) g.center[d] = 0.5 * (g.n[d] - 1);
    g.voxel = geom.voxel_size();
    return g;
}

template <int D, class Visit>
inline void trace(const Ray& ray, const Grid& g, Visit&& visit) {
    double p[D], r[D];
    const double inv_s = 1.0 / g.voxel;
    for (int d = 0; d < D; ++d) {
        p[d] = ray.source[d] * inv_s + g.center[d];
        r[d] = ray.direction[d];
    }
    const double len = ray.length * inv_s;

    int a = 0;
    for (int d = 1; d < D; ++d)
        if (std::abs(r[d]) > std::abs(r[a])) a = d;
    if (r[a] == 0.0) return;

    // Narrow the plane range to where interpolation can be nonzero; the exact
    // segment test below still decides membership.
    double tlo = 0.0, thi = len;
    for (int d = 0; d < D; ++d) {
        if (d == a) continue;
        if (r[d] != 0.0) {
            const double t1 = (-1.0 - p[d]) / r[d];
            const double t2 = (g.n[d] - p[d]) / r[d];
            tlo = std::max(tlo, std::min(t1, t2));
            thi = std::min(thi, std::max(t1, t2));
        } else if (p[d] <= -1.0 || p[d] >= g.n[d]) {
            return;
        }
    }
    if (tlo > thi) return;
    const double ea = p[a] + tlo * r[a], eb = p[a] + thi * r[a];
    const int i0 = std::max(0, static_cast<int>(std::floor(std::min(ea, eb))) - 1);
    const int i1 = std::min(g.n[a] - 1, static_cast<int>(std::ceil(std::max(ea, eb))) + 1);

    const double inv_ra = 1.0 / r[a];
    const double step = g.voxel * std::abs(inv_ra);

    if constexpr (D == 2) {
        const int b = 1 - a;
        const int nb = g.n[b];
        for (int i = i0; i <= i1; ++i) {
            const double t = (i - p[a]) * inv_ra;
            if (t < 0.0 || t > len) continue;
            const double fb = p[b] + t * r[b];
            const double fl = std::floor(fb);
            const int j = static_cast<int>(fl);
            const double w = fb - fl;
            const std::ptrdiff_t base = i * g.stride[a];
            if (j >= 0 && j < nb) visit(base + j * g.stride[b], (1.0 - w) * step);
            if (j + 1 >= 0 && j + 1 < nb) visit(base + (j + 1) * g.stride[b], w * step);
        }
    } else {
        const int b = a == 0 ? 1 : 0;
        const int c = a == 2 ? 1 : 2;
        const int nb = g.n[b], nc = g.n[c];
        for (int i = i0; i <= i1; ++i) {
            const double t = (i - p[a]) * inv_ra;
            if (t < 0.0 || t > len) continue;
            const double fb = p[b] + t * r[b];
            const double fc = p[c] + t * r[c];
            const double flb = std::floor(fb), flc = std::floor(fc);
            const int jb = static_cast<int>(flb), jc = static_cast<int>(flc);
            const double wb = fb - flb, wc = fc - flc;
            const std::ptrdiff_t base = i * g.stride[a];
            const bool b0 = jb >= 0 && jb < nb, b1 = jb + 1 >= 0 && jb + 1 < nb;
            const bool c0 = jc >= 0 && jc < nc, c1 = jc + 1 >= 0 && jc + 1 < nc;
            const std::ptrdiff_t ob0 = jb * g.stride[b], ob1 = ob0 + g.stride[b];
            const std::ptrdiff_t oc0 = jc * g.stride[c], oc1 = oc0 + g.stride[c];
            if (c0) {
                const double wrow = (1.0 - wc) * step;
                if (b0) visit(base + ob0 + oc0, (1.0 - wb) * wrow);
                if (b1) visit(base + ob1 + oc0, wb * wrow);
            }
            if (c1) {
                const double wrow = wc * step;
                if (b0) visit(base + ob0 + oc1, (1.0 - wb) * wrow);
                if (b1) visit(base + ob1 + oc1, wb * wrow);
            }
        }
    }
}

template <class Visit>
inline void trace_any(bool is3d, const Ray& ray, const Grid& g, Visit&& visit) {
    if (is3d)
        trace<3>(ray, g, visit);
    else
        trace<2>(ray, g, visit);
}

void check_volume(const Geometry& geom, const VolumeImage& vol) {
    require(vol.shape == geom.vol_shape(),
            "volume shape " + shape_string(vol.shape) + " does not match geometry " +
                shape_string(geom.vol_shape()));
}

void check_stack(const Geometry& geom, const ProjectionStack& stack) {
    require(stack.shape == geom.stack_shape(),
            "projection stack shape " + shape_string(stack.shape) +
                " does not match geometry " + shape_string(geom.stack_shape()));
}

} // namespace

void forward_project(const Geometry& geom, std::span<const double> vol,
                     std::span<double> out) {
    require(vol.size() == geom.voxel_count(), "forward_project: volume size mismatch");
    require(out.size() == geom.measurement_count(), "forward_project: output size mismatch");
    const Grid g = make_grid(geom);
    const bool is3d = geom.is_3d();
    const auto m = static_cast<std::ptrdiff_t>(geom.n_angles());
    const std::size_t per_angle = geom.pixels_per_angle();
    const double* src = vol.data();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < m; ++k) {
        const auto bundle = rays_for_angle(geom, static_cast<std::size_t>(k));
        double* row = out.data() + k * per_angle;
        for (std::size_t j = 0; j < per_angle; ++j) {
            double acc = 0.0;
            trace_any(is3d, bundle.rays[j], g,
                      [&](std::ptrdiff_t idx, double w) { acc += w * src[idx]; });
            row[j] = acc;
        }
    }
}

void back_project(const Geometry& geom, std::span<const double> stack,
                  std::span<double> vol) {
    require(stack.size() == geom.measurement_count(), "back_project: stack size mismatch");
    require(vol.size() == geom.voxel_count(), "back_project: volume size mismatch");
    const Grid g = make_grid(geom);
    const bool is3d = geom.is_3d();
    const std::size_t m = geom.n_angles();
    const std::size_t per_angle = geom.pixels_per_angle();

    auto accumulate = [&](std::size_t k_begin, std::size_t k_end, double* dst) {
        for (std::size_t k = k_begin; k < k_end; ++k) {
            const auto bundle = rays_for_angle(geom, k);
            const double* row = stack.data() + k * per_angle;
            for (std::size_t j = 0; j < per_angle; ++j) {
                const double val = row[j];
                if (val == 0.0) continue;
                trace_any(is3d, bundle.rays[j], g,
                          [&](std::ptrdiff_t idx, double w) { dst[idx] += w * val; });
            }
        }
    };

    std::fill(vol.begin(), vol.end(), 0.0);
    const int chunks = std::max(1, std::min<int>(thread_count(), static_cast<int>(m)));
    if (chunks == 1) {
        accumulate(0, m, vol.data());
        return;
    }
    // One accumulator per chunk of angles, summed in chunk order.
    std::vector<std::vector<double>> partial(chunks);
#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < chunks; ++c) {
        partial[c].assign(vol.size(), 0.0);
        accumulate(m * c / chunks, m * (c + 1) / chunks, partial[c].data());
    }
    for (int c = 0; c < chunks; ++c)
        for (std::size_t i = 0; i < vol.size(); ++i) vol[i] += partial[c][i];
}

ProjectionStack forward_project(const Geometry& geom, const VolumeImage& vol) {
    check_volume(geom, vol);
    ProjectionStack out(geom.stack_shape());
    forward_project(geom, vol.data, out.data);
    return out;
}

VolumeImage back_project(const Geometry& geom, const ProjectionStack& stack) {
    check_stack(geom, stack);
    VolumeImage vol(geom.vol_shape(), geom.voxel_size());
    back_project(geom, stack.data, vol.data);
    return vol;
}

void for_each_ray_coefficient(const Geometry& geom, const Ray& ray,
                              const std::function<void(std::size_t, double)>& visit) {
    const Grid g = make_grid(geom);
    trace_any(geom.is_3d(), ray, g, [&](std::ptrdiff_t idx, double w) {
        visit(static_cast<std::size_t>(idx), w);
    });
}

} // namespace learnfbp
