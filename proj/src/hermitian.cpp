#include "cran/hermitian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cran/errors.hpp"

namespace cran {

namespace {

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.adjoint());
}

}  // namespace

HermitianMatrix::HermitianMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("HermitianMatrix: input is not square");
    if (!all_finite(m)) throw std::invalid_argument("HermitianMatrix: non-finite entries");
    m_ = symmetrized(m);
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
    return HermitianMatrix(Matrix::Zero(dim, dim), true);
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
    return HermitianMatrix(Matrix::Identity(dim, dim), true);
}

HermitianMatrix HermitianMatrix::scaled_identity(Eigen::Index dim, double scale) {
    return HermitianMatrix(scale * Matrix::Identity(dim, dim), scale >= 0.0);
}

HermitianMatrix HermitianMatrix::psd(const Matrix& m) {
    HermitianMatrix h(m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.m_);
    if (es.info() != Eigen::Success) throw NumericalError("psd: eigendecomposition failed");
    RealVector vals = es.eigenvalues();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals[i] < -kPsdClampTol)
            throw NumericalError("psd: eigenvalue " + std::to_string(vals[i]) +
                                 " below clamp threshold");
        if (vals[i] < 0.0) vals[i] = 0.0;
    }
    Matrix rebuilt = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
    return HermitianMatrix(symmetrized(rebuilt), true);
}

HermitianMatrix HermitianMatrix::scaled(double s) const {
    return HermitianMatrix(Matrix(s * m_), psd_ && s >= 0.0);
}

HermitianMatrix HermitianMatrix::plus(const HermitianMatrix& other) const {
    return HermitianMatrix(Matrix(m_ + other.m_), psd_ && other.psd_);
}

HermitianMatrix HermitianMatrix::shifted(double s) const {
    Matrix m = m_;
    m.diagonal().array() += s;
    return HermitianMatrix(std::move(m), psd_ && s >= 0.0);
}

HermitianMatrix psd_from_eigen(const Matrix& basis, const RealVector& values) {
    Matrix m = basis * values.asDiagonal() * basis.adjoint();
    return HermitianMatrix(symmetrized(m), true);
}

EigenPair eig_desc(const HermitianMatrix& m) {
    if (!m.mat().allFinite()) throw std::invalid_argument("eig_desc: non-finite entries");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
    if (es.info() != Eigen::Success) throw NumericalError("eig_desc: solver failed");
    const Eigen::Index n = m.dim();
    EigenPair out;
    out.basis = Matrix(n, n);
    out.values = RealVector(n);
    // Eigen returns ascending order; flip to non-increasing.
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values[i] = es.eigenvalues()[n - 1 - i];
        out.basis.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

HermitianMatrix cond_cov(const HermitianMatrix& sigma_x, const Matrix& h_stack,
                         const HermitianMatrix& sigma_t) {
    if (h_stack.rows() == 0) return HermitianMatrix::psd(sigma_x.mat());
    if (h_stack.cols() != sigma_x.dim())
        throw std::invalid_argument("cond_cov: stack width does not match sigma_x");
    if (sigma_t.dim() != h_stack.rows())
        throw std::invalid_argument("cond_cov: sigma_t does not match stack height");

    const Matrix g = h_stack * sigma_x.mat();               // H Sigma_x
    const Matrix inner = g * h_stack.adjoint() + sigma_t.mat();
    Eigen::LLT<Matrix> llt(0.5 * (inner + inner.adjoint()));
    if (llt.info() != Eigen::Success)
        throw NumericalError("cond_cov: inner matrix is not positive definite");
    const Matrix reduced = sigma_x.mat() - g.adjoint() * llt.solve(g);
    return HermitianMatrix::psd(reduced);
}

double logdet_pd(const Matrix& m) {
    Eigen::LLT<Matrix> llt(0.5 * (m + m.adjoint()));
    if (llt.info() != Eigen::Success)
        throw NumericalError("logdet_pd: matrix is not positive definite");
    double acc = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log(l(i, i).real());
    return 2.0 * acc / std::numbers::ln2;
}

double logdet_cap(const HermitianMatrix& m) {
    if (m.dim() == 0) return 0.0;
    Matrix shifted = m.mat();
    shifted.diagonal().array() += 1.0;
    return logdet_pd(shifted);
}

Matrix factor_gain(const HermitianMatrix& omega) {
    EigenPair ep = eig_desc(omega);
    RealVector vals = ep.values;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals[i] < -kPsdClampTol)
            throw NumericalError("factor_gain: matrix is not PSD");
        if (vals[i] < 0.0) vals[i] = 0.0;
        vals[i] = std::sqrt(vals[i]);
    }
    return vals.asDiagonal() * ep.basis.adjoint();
}

}  // namespace cran
