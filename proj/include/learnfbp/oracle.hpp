#pragma once

#include <vector>

#include <Eigen/Dense>

#include "learnfbp/filters.hpp"
#include "learnfbp/geometry.hpp"
#include "learnfbp/phantom.hpp"

namespace learnfbp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kMaxDenseSize = 4096;

/// Explicit system matrix of a small geometry. Column j = forward_project(e_j).
struct DenseOperator {
    Matrix A;
    GeometryParams geometry;
};

/// Column j = forward_project(e_j). Throws ValidationError above kMaxDenseSize.
Matrix system_matrix(const Geometry& geom);

/// system_matrix plus the full-row-rank check (NumericalError when it fails).
DenseOperator materialize(const Geometry& geom);

/// Full row rank: smallest singular value > 1e-10 * largest.
bool has_full_row_rank(const Matrix& A);

/**
 * Centered Gaussian model: x ~ N(0, sxx), y = A x + e, e ~ N(0, sigma2 I).
 */
struct MomentModel {
    Matrix sxx;
    double sigma2 = 0.0;

    void validate() const;
    Matrix syy(const Matrix& A) const;  // A sxx A^T + sigma2 I
    Matrix sxy(const Matrix& A) const;  // sxx A^T
};

/// Sample second moments: syy = K^-1 sum y y^T (M x M), sxy = K^-1 sum x y^T (N x M).
struct EmpiricalMoments {
    Matrix syy;
    Matrix sxy;
};

EmpiricalMoments empirical_moments(const Dataset& data);

/**
 * Solves A A^T B syy + lambda B = A sxy by diagonalizing A A^T and syy.
 * Throws NumericalError when the system is singular.
 */
Matrix solve_optimal_B(const Matrix& A, const Matrix& syy, const Matrix& sxy, double lambda);
Matrix solve_optimal_B(const Matrix& A, const MomentModel& model, double lambda);

/// ||A A^T B syy + lambda B - A sxy||_F.
double optimality_residual(const Matrix& A, const Matrix& B, const Matrix& syy,
                           const Matrix& sxy, double lambda);

struct SpectralRow {
    double singular_value = 0.0;
    double gain = 0.0;      // H_ii
    double zeta = 0.0;
    double beta = 0.0;
};

struct SpectralFactors {
    std::vector<SpectralRow> rows;  // descending singular values
    double variance = 0.0;          // sigma^2 sum zeta_i^2
    double bias = 0.0;              // sum beta_i^2
};

/// Per-mode gain of the optimal operator for sxx = I and noise std `sigma`.
SpectralFactors spectral_factors(const Matrix& A, double sigma, double lambda);

/**
 * Splits E||A^T B y - x||^2 into variance, bias and nullspace terms.
 * `cross` is the remaining coupling between the range and null space
 * components; it is zero when sxx = I. total = variance + bias + nullspace + cross.
 */
struct ErrorDecomposition {
    double variance = 0.0;
    double bias = 0.0;
    double nullspace = 0.0;
    double cross = 0.0;
    double total = 0.0;
};

ErrorDecomposition error_decomposition(const Matrix& A, const Matrix& B,
                                       const MomentModel& model);

/// 2-Wasserstein distance between the zero-mean joint (x, y) Gaussians of two models.
double gaussian_w2(const Matrix& A, const MomentModel& pi, const MomentModel& pi_prime);

struct StabilityRow {
    double lambda = 0.0;
    double gap = 0.0;
};

struct StabilityTable {
    double w2 = 0.0;
    std::vector<StabilityRow> rows;
};

/// ||B*_pi - B*_pi'||_F for each lambda.
StabilityTable stability_probe(const Matrix& A, const MomentModel& pi,
                               const MomentModel& pi_prime,
                               const std::vector<double>& lambda_grid);

/// Dense matrix of B(p) (M x M), column j = apply_B(e_j).
Matrix materialize_filter_operator(const FilterParams& params, const Geometry& geom);

} // namespace learnfbp
