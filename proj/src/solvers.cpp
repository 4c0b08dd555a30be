#include "cran/solvers.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "cran/errors.hpp"

namespace cran {

namespace detail {

namespace {

constexpr double kMuEps = 1e-12;
constexpr int kBisectIters = 200;

double cap_bits(const RealVector& gains, const RealVector& levels) {
    double bits = 0.0;
    for (Eigen::Index l = 0; l < gains.size(); ++l)
        bits += std::log2(1.0 + gains[l] * levels[l]);
    return bits;
}

WaterFill bisect_gains(const RealVector& levels, double capacity_bits, double mu_lo, double mu_hi,
                       const std::function<RealVector(double)>& gains_at) {
    WaterFill wf;
    wf.gains = RealVector::Zero(levels.size());
    if (capacity_bits <= 0.0) {
        wf.attained = capacity_bits == 0.0;
        return wf;
    }
    if (cap_bits(gains_at(mu_lo), levels) < capacity_bits) return wf;  // unattainable

    double lo = mu_lo, hi = mu_hi;
    for (int it = 0; it < kBisectIters; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cap_bits(gains_at(mid), levels) >= capacity_bits)
            lo = mid;
        else
            hi = mid;
    }
    wf.mu = lo;
    wf.gains = gains_at(lo);
    wf.achieved_bits = cap_bits(wf.gains, levels);
    wf.attained = std::abs(wf.achieved_bits - capacity_bits) <= 1e-9;
    return wf;
}

}  // namespace

WaterFill water_fill_max_rate(const RealVector& levels, double capacity_bits) {
    // alpha_l > 0 needs mu < 1 - 1/lambda_l, so mu lives in (0, 1).
    auto gains_at = [&](double mu) {
        RealVector g(levels.size());
        for (Eigen::Index l = 0; l < levels.size(); ++l)
            g[l] = std::max((1.0 - 1.0 / levels[l]) / mu - 1.0, 0.0);
        return g;
    };
    return bisect_gains(levels, capacity_bits, kMuEps, 1.0 - kMuEps, gains_at);
}

WaterFill water_fill_mmse(const RealVector& levels, double capacity_bits) {
    // alpha_l > 0 needs mu < lambda_l; zero eigenvalues never get gain.
    const double lmax = levels.size() ? levels.maxCoeff() : 0.0;
    if (lmax <= 0.0) {
        WaterFill wf;
        wf.gains = RealVector::Zero(levels.size());
        wf.attained = capacity_bits == 0.0;
        return wf;
    }
    auto gains_at = [&](double mu) {
        RealVector g(levels.size());
        for (Eigen::Index l = 0; l < levels.size(); ++l)
            g[l] = levels[l] > 0.0 ? std::max(1.0 / mu - 1.0 / levels[l], 0.0) : 0.0;
        return g;
    };
    return bisect_gains(levels, capacity_bits, kMuEps * lmax, lmax, gains_at);
}

}  // namespace detail

namespace {

BsDesign zero_design(const EigenPair& ep, const RealVector& levels, bool no_signal) {
    BsDesign d;
    d.omega = HermitianMatrix::zero(ep.basis.rows());
    d.gain = Matrix::Zero(ep.basis.rows(), ep.basis.rows());
    d.basis = ep.basis;
    d.stream_gains = RealVector::Zero(levels.size());
    d.stream_levels = levels;
    d.no_signal = no_signal;
    return d;
}

BsDesign assemble_klt_design(const EigenPair& ep, const RealVector& levels,
                             const detail::WaterFill& wf) {
    BsDesign d;
    d.omega = psd_from_eigen(ep.basis, wf.gains);
    RealVector sqrt_gains = wf.gains.array().sqrt();
    d.gain = sqrt_gains.asDiagonal() * ep.basis.adjoint();
    d.basis = ep.basis;
    d.stream_gains = wf.gains;
    d.stream_levels = levels;
    d.mu = wf.mu;
    d.backhaul_used = wf.achieved_bits;
    return d;
}

}  // namespace

BsDesign max_rate_compress_form(const HermitianMatrix& form, double capacity_bits) {
    if (capacity_bits < 0.0) throw std::invalid_argument("max_rate_compress: negative budget");
    EigenPair ep = eig_desc(form);
    // Signal-plus-noise levels of H Sigma H^H + I; same eigenvectors.
    RealVector levels = ep.values.array().max(0.0) + 1.0;
    if (capacity_bits == 0.0) return zero_design(ep, levels, false);

    const auto wf = detail::water_fill_max_rate(levels, capacity_bits);
    if (!wf.attained) return zero_design(ep, levels, true);
    return assemble_klt_design(ep, levels, wf);
}

BsDesign max_rate_compress(const Matrix& h, const HermitianMatrix& sigma_cond, double capacity_bits) {
    return max_rate_compress_form(HermitianMatrix(h * sigma_cond.mat() * h.adjoint()),
                                  capacity_bits);
}

BsDesign mmse_compress(const Matrix& h, const HermitianMatrix& sigma_x,
                       const HermitianMatrix& sigma_cond, double capacity_bits,
                       MmseVariant variant) {
    if (capacity_bits < 0.0) throw std::invalid_argument("mmse_compress: negative budget");
    const Eigen::Index n_rx = h.rows();

    const HermitianMatrix& sigma = variant.side_info ? sigma_cond : sigma_x;
    Matrix rx_cov = h * sigma.mat() * h.adjoint();
    rx_cov.diagonal().array() += 1.0;

    Matrix p;  // pre-processor (identity for direct methods)
    Matrix pre_cov;
    if (variant.indirect) {
        Matrix sy = h * sigma_x.mat() * h.adjoint();
        sy.diagonal().array() += 1.0;
        Eigen::LLT<Matrix> llt(0.5 * (sy + sy.adjoint()));
        if (llt.info() != Eigen::Success)
            throw NumericalError("mmse_compress: received covariance not positive definite");
        p = llt.solve(h * sigma_x.mat()).adjoint();  // Sigma_x H^H Sigma_y^{-1}
        pre_cov = p * rx_cov * p.adjoint();
    } else {
        p = Matrix::Identity(n_rx, n_rx);
        pre_cov = rx_cov;
    }

    EigenPair ep = eig_desc(HermitianMatrix(pre_cov));
    RealVector levels = ep.values.array().max(0.0);

    BsDesign d;
    if (capacity_bits == 0.0) {
        d = BsDesign::zero(n_rx);
        d.stream_levels = levels;
        return d;
    }
    const auto wf = detail::water_fill_mmse(levels, capacity_bits);
    if (!wf.attained) {
        d = BsDesign::zero(n_rx);
        d.stream_levels = levels;
        d.no_signal = true;
        return d;
    }

    // Omega lives on the received signal: P^H U diag(alpha) U^H P.
    Matrix omega_bar = ep.basis * wf.gains.asDiagonal() * ep.basis.adjoint();
    d.omega = HermitianMatrix::psd(p.adjoint() * omega_bar * p);
    d.gain = factor_gain(d.omega);
    d.basis = ep.basis;
    d.stream_gains = wf.gains;
    d.stream_levels = levels;
    d.mu = wf.mu;
    d.backhaul_used = wf.achieved_bits;
    return d;
}

}  // namespace cran
