#include "learnfbp/oracle.hpp"

#include <cmath>

#include "learnfbp/errors.hpp"
#include "learnfbp/projector.hpp"

namespace learnfbp {

namespace {

Matrix symmetric_sqrt(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (S + S.transpose()));
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix joint_covariance(const Matrix& A, const MomentModel& m) {
    const auto n = A.cols(), k = A.rows();
    Matrix J(n + k, n + k);
    const Matrix sxy = m.sxy(A);
    J.topLeftCorner(n, n) = m.sxx;
    J.topRightCorner(n, k) = sxy;
    J.bottomLeftCorner(k, n) = sxy.transpose();
    J.bottomRightCorner(k, k) = m.syy(A);
    return J;
}

} // namespace

bool has_full_row_rank(const Matrix& A) {
    if (A.rows() > A.cols()) return false;
    Eigen::BDCSVD<Matrix> svd(A);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return false;
    return s(s.size() - 1) > 1e-10 * s(0);
}

Matrix system_matrix(const Geometry& geom) {
    const std::size_t m = geom.measurement_count(), n = geom.voxel_count();
    require(m <= kMaxDenseSize && n <= kMaxDenseSize,
            "dense operator too large: " + std::to_string(m) + " x " + std::to_string(n));
    Matrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    std::vector<double> basis(n, 0.0), column(m);
    for (std::size_t j = 0; j < n; ++j) {
        basis[j] = 1.0;
        forward_project(geom, basis, column);
        basis[j] = 0.0;
        A.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Vector>(column.data(), static_cast<Eigen::Index>(m));
    }
    return A;
}

DenseOperator materialize(const Geometry& geom) {
    DenseOperator op{system_matrix(geom), geom.params()};
    if (!has_full_row_rank(op.A))
        throw NumericalError("system matrix does not have full row rank");
    return op;
}

void MomentModel::validate() const {
    require(sxx.rows() == sxx.cols() && sxx.rows() > 0, "sxx must be square");
    require((sxx - sxx.transpose()).norm() <= 1e-12 * std::max(1.0, sxx.norm()),
            "sxx must be symmetric");
    require(Eigen::LLT<Matrix>(sxx).info() == Eigen::Success,
            "sxx must be positive definite");
    require(sigma2 >= 0.0, "noise variance must be >= 0");
}

Matrix MomentModel::syy(const Matrix& A) const {
    require(A.cols() == sxx.rows(), "A and sxx dimensions differ");
    return A * sxx * A.transpose() + sigma2 * Matrix::Identity(A.rows(), A.rows());
}

Matrix MomentModel::sxy(const Matrix& A) const {
    require(A.cols() == sxx.rows(), "A and sxx dimensions differ");
    return sxx * A.transpose();
}

EmpiricalMoments empirical_moments(const Dataset& data) {
    require(data.size() >= 1, "empirical moments need at least one sample");
    const auto m = static_cast<Eigen::Index>(data.y[0].size());
    const auto n = static_cast<Eigen::Index>(data.x[0].size());
    const auto k = static_cast<Eigen::Index>(data.size());
    Matrix Y(m, k), X(n, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        require(static_cast<Eigen::Index>(data.y[i].size()) == m &&
                    static_cast<Eigen::Index>(data.x[i].size()) == n,
                "dataset samples differ in size");
        Y.col(i) = Eigen::Map<const Vector>(data.y[i].data.data(), m);
        X.col(i) = Eigen::Map<const Vector>(data.x[i].data.data(), n);
    }
    const double inv_k = 1.0 / static_cast<double>(k);
    EmpiricalMoments out;
    out.syy = inv_k * Y * Y.transpose();
    out.syy = 0.5 * (out.syy + out.syy.transpose());
    out.sxy = inv_k * X * Y.transpose();
    return out;
}

Matrix solve_optimal_B(const Matrix& A, const Matrix& syy, const Matrix& sxy, double lambda) {
    const auto m = A.rows();
    require(lambda >= 0.0, "lambda must be >= 0");
    require(syy.rows() == m && syy.cols() == m, "syy must be M x M");
    require(sxy.rows() == A.cols() && sxy.cols() == m, "sxy must be N x M");

    Eigen::SelfAdjointEigenSolver<Matrix> gram(A * A.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> cov(0.5 * (syy + syy.transpose()));
    const Matrix& Q = gram.eigenvectors();
    const Matrix& P = cov.eigenvectors();
    const Vector d = gram.eigenvalues().cwiseMax(0.0);
    const Vector e = cov.eigenvalues().cwiseMax(0.0);

    Matrix C = Q.transpose() * (A * sxy) * P;
    const double scale = d.maxCoeff() * e.maxCoeff() + lambda;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const double den = d(i) * e(j) + lambda;
            if (!(den > 1e-14 * scale))
                throw NumericalError("optimality system is singular");
            C(i, j) /= den;
        }
    return Q * C * P.transpose();
}

Matrix solve_optimal_B(const Matrix& A, const MomentModel& model, double lambda) {
    model.validate();
    return solve_optimal_B(A, model.syy(A), model.sxy(A), lambda);
}

double optimality_residual(const Matrix& A, const Matrix& B, const Matrix& syy,
                           const Matrix& sxy, double lambda) {
    return (A * A.transpose() * B * syy + lambda * B - A * sxy).norm();
}

SpectralFactors spectral_factors(const Matrix& A, double sigma, double lambda) {
    require(sigma >= 0.0 && lambda >= 0.0, "sigma and lambda must be >= 0");
    Eigen::BDCSVD<Matrix> svd(A);
    const double s2 = sigma * sigma;
    SpectralFactors out;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        const double s = svd.singularValues()(i);
        const double den = (s * s + s2) * s * s + lambda;
        SpectralRow row;
        row.singular_value = s;
        row.gain = s * s / den;
        row.zeta = s * s * s / den;
        row.beta = (s2 * s * s + lambda) / den;
        out.variance += s2 * row.zeta * row.zeta;
        out.bias += row.beta * row.beta;
        out.rows.push_back(row);
    }
    return out;
}

ErrorDecomposition error_decomposition(const Matrix& A, const Matrix& B,
                                       const MomentModel& model) {
    model.validate();
    require(B.rows() == A.rows() && B.cols() == A.rows(), "B must be M x M");
    const auto n = A.cols();
    const Matrix& sxx = model.sxx;
    const Matrix pinv = A.completeOrthogonalDecomposition().pseudoInverse();
    const Matrix T = A.transpose() * B;
    const Matrix range_err = (T - pinv) * A;
    const Matrix null_proj = Matrix::Identity(n, n) - pinv * A;

    ErrorDecomposition out;
    out.variance = model.sigma2 * (B.transpose() * A * A.transpose() * B).trace();
    out.bias = (range_err * sxx * range_err.transpose()).trace();
    out.nullspace = (null_proj * sxx).trace();
    out.cross = -2.0 * (range_err * sxx * null_proj).trace();
    out.total = (T * model.syy(A) * T.transpose()).trace() - 2.0 * (T * A * sxx).trace() +
                sxx.trace();
    return out;
}

double gaussian_w2(const Matrix& A, const MomentModel& pi, const MomentModel& pi_prime) {
    const Matrix s1 = joint_covariance(A, pi);
    const Matrix s2 = joint_covariance(A, pi_prime);
    const Matrix r1 = symmetric_sqrt(s1);
    const Matrix cross = symmetric_sqrt(r1 * s2 * r1);
    const double w2sq = s1.trace() + s2.trace() - 2.0 * cross.trace();
    return std::sqrt(std::max(0.0, w2sq));
}

StabilityTable stability_probe(const Matrix& A, const MomentModel& pi,
                               const MomentModel& pi_prime,
                               const std::vector<double>& lambda_grid) {
    require(!lambda_grid.empty(), "lambda grid is empty");
    StabilityTable out;
    out.w2 = gaussian_w2(A, pi, pi_prime);
    for (double lambda : lambda_grid) {
        require(lambda > 0.0, "stability probe needs lambda > 0");
        const Matrix b1 = solve_optimal_B(A, pi, lambda);
        const Matrix b2 = solve_optimal_B(A, pi_prime, lambda);
        out.rows.push_back({lambda, (b1 - b2).norm()});
    }
    return out;
}

Matrix materialize_filter_operator(const FilterParams& params, const Geometry& geom) {
    params.check_against(geom);
    const std::size_t m = geom.measurement_count();
    require(m <= kMaxDenseSize, "filter operator too large to materialize");
    FilterEngine engine(geom);
    Matrix B(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    std::vector<double> basis(m, 0.0), column(m);
    for (std::size_t j = 0; j < m; ++j) {
        basis[j] = 1.0;
        engine.apply(params, basis, column);
        basis[j] = 0.0;
        B.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Vector>(column.data(), static_cast<Eigen::Index>(m));
    }
    return B;
}

} // namespace learnfbp
