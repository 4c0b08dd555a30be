#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cran {

using Cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Hermiticity is enforced by symmetrization at construction; entries then
/// match their conjugate transpose to well below this tolerance.
inline constexpr double kHermitianTol = 1e-10;
/// Eigenvalues of a PSD-tagged matrix in [-kPsdClampTol, 0) are clamped to
/// zero; anything below is an error rather than a silent clamp.
inline constexpr double kPsdClampTol = 1e-9;

/// Complex Hermitian matrix. Every covariance and channel-derived quadratic
/// form in the library is carried by this type; instances are immutable
/// after construction and safe to share across threads.
class HermitianMatrix {
  public:
    HermitianMatrix() = default;

    /// Symmetrizes the input as (M + M^H)/2. Throws std::invalid_argument on
    /// non-finite entries or a non-square input.
    explicit HermitianMatrix(const Matrix& m);

    static HermitianMatrix zero(Eigen::Index dim);
    static HermitianMatrix identity(Eigen::Index dim);
    static HermitianMatrix scaled_identity(Eigen::Index dim, double scale);

    /// Symmetrizes and validates positive semi-definiteness: eigenvalues in
    /// [-kPsdClampTol, 0) are clamped to zero, anything lower throws
    /// NumericalError. The result carries the PSD tag.
    static HermitianMatrix psd(const Matrix& m);

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& mat() const { return m_; }
    bool psd_tagged() const { return psd_; }

    double trace_real() const { return m_.trace().real(); }

    HermitianMatrix scaled(double s) const;
    HermitianMatrix plus(const HermitianMatrix& other) const;
    /// M + s*I, preserving the PSD tag when s >= 0.
    HermitianMatrix shifted(double s) const;

  private:
    HermitianMatrix(Matrix m, bool psd) : m_(std::move(m)), psd_(psd) {}

    Matrix m_;
    bool psd_ = false;

    friend HermitianMatrix psd_from_eigen(const Matrix& basis, const RealVector& values);
};

/// Rebuilds U diag(values) U^H with nonnegative `values`, tagging PSD without
/// a validation pass. Internal fast path for solver-constructed matrices.
HermitianMatrix psd_from_eigen(const Matrix& basis, const RealVector& values);

/// Result of eig_desc: unitary basis (columns are eigenvectors) and real
/// eigenvalues sorted non-increasing.
struct EigenPair {
    Matrix basis;
    RealVector values;

    Matrix reconstruct() const { return basis * values.asDiagonal() * basis.adjoint(); }
};

/// Sorted eigendecomposition of a Hermitian matrix, eigenvalues
/// non-increasing. Throws std::invalid_argument on non-finite entries.
EigenPair eig_desc(const HermitianMatrix& m);

/// Conditional covariance, the correlation of x given linear observations
/// H x + t:
///
///   Sigma_x - Sigma_x H^H (H Sigma_x H^H + Sigma_t)^{-1} H Sigma_x
///
/// `h_stack` holds the stacked observation rows; an empty stack returns
/// `sigma_x` unchanged. The inner matrix must be positive definite (it always
/// is when Sigma_t contains an identity summand); a failed factorization
/// throws NumericalError. The result is symmetrized and PSD-tagged.
HermitianMatrix cond_cov(const HermitianMatrix& sigma_x, const Matrix& h_stack,
                         const HermitianMatrix& sigma_t);

/// log2 det(I + M) in bits. Throws NumericalError unless I + M is positive
/// definite. Zero matrix gives 0.
double logdet_cap(const HermitianMatrix& m);

/// log2 det(M) for Hermitian positive definite M (Cholesky based).
double logdet_pd(const Matrix& m);

/// Gain factor A with A^H A = Omega, built as diag(sqrt(alpha)) U^H from the
/// eigendecomposition of Omega. Requires Omega PSD.
Matrix factor_gain(const HermitianMatrix& omega);

}  // namespace cran
