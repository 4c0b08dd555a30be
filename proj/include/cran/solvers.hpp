#pragma once

#include "cran/hermitian.hpp"
#include "cran/rates.hpp"

namespace cran {

/// One of the four MMSE compression criteria: distortion target (the
/// received signal directly, or the transmit signal through an MMSE
/// pre-processor) crossed with decoder side information on/off.
struct MmseVariant {
    bool indirect = false;   // target x instead of y
    bool side_info = false;  // condition the KLT on the decoder side info

    static MmseVariant direct_nsi() { return {false, false}; }
    static MmseVariant direct_si() { return {false, true}; }
    static MmseVariant indirect_nsi() { return {true, false}; }
    static MmseVariant indirect_si() { return {true, true}; }
};

/// Rate-optimal compression against the conditional covariance: conditional
/// KLT of H Sigma_cond H^H + I, gains alpha_l = [(1/mu)(1 - 1/lambda_l) - 1]^+
/// with mu set by bisection so the description rate equals `capacity_bits`.
/// Passing Sigma_x as sigma_cond gives the no-side-information variant.
///
/// When the budget cannot be spent (all lambda at the noise floor) the zero
/// design is returned with `no_signal` set.
BsDesign max_rate_compress(const Matrix& h, const HermitianMatrix& sigma_cond, double capacity_bits);

/// Same solver fed the received-signal quadratic form F = H Sigma_cond H^H
/// directly (the robust pipeline perturbs this form rather than Sigma_cond).
BsDesign max_rate_compress_form(const HermitianMatrix& form, double capacity_bits);

/// Distortion-optimal compression (direct/indirect x with/without side
/// information): KLT of P (H Sigma H^H + I) P^H with P = I or the MMSE
/// pre-processor Sigma_x H^H (H Sigma_x H^H + I)^{-1}, gains
/// alpha_l = [1/mu - 1/lambda_l]^+, and Omega = P^H U diag(alpha) U^H P.
BsDesign mmse_compress(const Matrix& h, const HermitianMatrix& sigma_x,
                       const HermitianMatrix& sigma_cond, double capacity_bits, MmseVariant variant);

namespace detail {

/// Bisection for mu on a strictly decreasing capacity curve
/// sum log2(1 + alpha_l(mu) lambda_l); returns achieved capacity as well.
struct WaterFill {
    RealVector gains;
    double mu = 0.0;
    double achieved_bits = 0.0;
    bool attained = false;
};

WaterFill water_fill_max_rate(const RealVector& levels, double capacity_bits);
WaterFill water_fill_mmse(const RealVector& levels, double capacity_bits);

}  // namespace detail

}  // namespace cran
