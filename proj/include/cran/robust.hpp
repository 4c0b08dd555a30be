#pragma once

#include <cstdint>
#include <vector>

#include "cran/rates.hpp"

namespace cran {

/// Eigenvalue bounds of the additive uncertainty on the received-signal
/// quadratic form H Sigma_cond H^H: every admissible perturbation Delta has
/// lower <= eig(Delta) <= upper.
struct UncertaintyBounds {
    double lower = 0.0;  // lambda_LB <= 0
    double upper = 0.0;  // lambda_UB >= 0

    /// True when nominal_form + lower * I stays PSD (within slack), i.e. the
    /// whole uncertainty set consists of valid covariances.
    bool consistent_with(const HermitianMatrix& nominal_form, double slack = 1e-9) const;

    /// Raises `lower` to -lambda_min(nominal_form) when needed; `upper` is
    /// untouched (it alone drives worst-case backhaul feasibility).
    UncertaintyBounds clamped_for(const HermitianMatrix& nominal_form) const;

    double spread() const { return upper - lower; }
};

/// Coefficients of the per-stream stationarity quadratic
/// alpha^2 + Q alpha + S = 0 at multiplier mu; `level` is an eigenvalue of
/// the nominal form + I. Throws NumericalError when level + lower <= 0.
struct QsCoeffs {
    double q = 0.0;
    double s = 0.0;
};
QsCoeffs qs_coeffs(double mu, double level, const UncertaintyBounds& bounds);

/// Discrete candidate gain set P_l(mu): at most three nonnegative values
/// determined by the signs of (Q, S) and the discriminant.
std::vector<double> candidate_set(double mu, double level, const UncertaintyBounds& bounds);

struct RobustDesign {
    BsDesign entry;
    double worst_case_rate = 0.0;  // g^L(alpha) - sum log2(1 + alpha_l), bits
};

/// Worst-case robust compression: eigen-basis of the nominal form + I, gains
/// from the mixed integer-continuous search over (mu, candidate pattern)
/// with the pessimistic budget sum log2(1 + alpha_l (level_l + upper)) pinned
/// to `capacity_bits`. The scan walks a mu grid, holds each stream's
/// candidate branch fixed inside a bracketing cell, and refines the budget
/// equality by bisection; the feasible candidate with the largest worst-case
/// objective wins.
///
/// C = 0 returns the zero design. Throws NumericalError when no candidate
/// attains the budget within 1e-4 bits (message carries the nearest achieved
/// value) or when the bounds are infeasible for the form.
RobustDesign robust_compress_form(const HermitianMatrix& nominal_form, double capacity_bits,
                                  const UncertaintyBounds& bounds);
RobustDesign robust_compress(const Matrix& h, const HermitianMatrix& sigma_cond_hat,
                             double capacity_bits, const UncertaintyBounds& bounds);

/// Largest scaled violation of the per-stream KKT system at the returned
/// (mu, alpha): the stationarity quadratic for active streams, its
/// nonnegativity for zeroed streams.
double robust_kkt_residual(const RobustDesign& design, const UncertaintyBounds& bounds);

/// Randomized covariance uncertainty of the simulation protocol: eigenvalue
/// bounds +/- lambda_min of the true form restricted to the column space of
/// H, perturbation eigenvectors Haar on that column space, eigenvalues
/// uniform within the bounds. The true form splits as nominal + delta and
/// the nominal stays PSD by construction.
struct UncertaintySample {
    HermitianMatrix nominal_form;  // what the BS believes: H Sigma_hat H^H
    HermitianMatrix delta;         // realized error, true form = nominal + delta
    UncertaintyBounds bounds;
};
UncertaintySample sample_uncertainty(const Matrix& h, const HermitianMatrix& sigma_cond,
                                     std::uint64_t seed);

}  // namespace cran
