#pragma once

#include <vector>

#include "cran/channel.hpp"
#include "cran/hermitian.hpp"

namespace cran {

/// Rate-equality tolerance used throughout tests and feasibility checks
/// (double-precision log-det noise on matrices up to ~32 dims).
inline constexpr double kRateTol = 1e-6;

/// Single-BS compression design: Gaussian test channel yhat = A y + q with
/// unit compression noise and Omega = A^H A.
struct BsDesign {
    HermitianMatrix omega;      // PSD
    Matrix gain;                // A, A^H A = omega (within 1e-8)
    Matrix basis;               // eigen-basis U the design was built in
    RealVector stream_gains;    // alpha_l
    RealVector stream_levels;   // lambda_l (signal-plus-noise eigenvalues)
    double mu = 0.0;            // water-filling multiplier
    double backhaul_used = 0.0; // bits actually consumed at the vertex
    bool no_signal = false;     // set when the budget cannot be spent

    bool active() const { return omega.dim() > 0 && omega.trace_real() > 0.0; }

    static BsDesign zero(Eigen::Index dim);
};

/// Designs for a set of BSs plus the sequential order they were built in.
/// `entries` is indexed by BS id; BSs outside `order` hold zero designs.
struct CompressionSolution {
    std::vector<BsDesign> entries;
    std::vector<int> order;
};

/// Side-information-aware description rate (the function f_i):
///
///   log2 det(I + Omega (H Sigma_cond H^H + I)) = I(y_i; yhat_i | yhat_S)
///
/// for the Gaussian test channel, where Sigma_cond is the transmit covariance
/// conditioned on the decoder side information.
double side_rate_f(const HermitianMatrix& omega, const Matrix& h, const HermitianMatrix& sigma_cond);

/// Same with the received-signal quadratic form F = H Sigma_cond H^H (or a
/// perturbed version of it) supplied directly.
double side_rate_f_form(const HermitianMatrix& omega, const HermitianMatrix& form);

/// Useful rate carried by the description: f_i(Omega) - log2 det(I + Omega)
/// = I(x; yhat_i | yhat_S). Saturates at log2 det(I + H Sigma_cond H^H).
double net_rate(const HermitianMatrix& omega, const Matrix& h, const HermitianMatrix& sigma_cond);
double net_rate_form(const HermitianMatrix& omega, const HermitianMatrix& form);

/// Stacked observation blocks yhat_i = (A_i H_i) x + t_i with
/// Sigma_t = blkdiag(A_i A_i^H + I); shared by the joint mutual-information
/// evaluators below.
struct DescriptionStack {
    Matrix h_bar;            // stacked A_i H_i
    HermitianMatrix sigma_t; // block diagonal A_i A_i^H + I

    Eigen::Index rows() const { return h_bar.rows(); }
};

DescriptionStack stack_descriptions(const ChannelSet& ch, const CompressionSolution& sol,
                                    const std::vector<int>& bss);

/// I(x; yhat_S | conditioning) = log2 det(Hbar Sigma Hbar^H + Sigma_t)
///                             - log2 det(Sigma_t).
double mi_x_descriptions(const DescriptionStack& stack, const HermitianMatrix& sigma_cond);

/// I(y_S; yhat_S | conditioning) = log2 det(Hbar Sigma Hbar^H + Sigma_t);
/// the residual uncertainty given y_S is the unit compression noise.
double mi_y_descriptions(const DescriptionStack& stack, const HermitianMatrix& sigma_cond);

/// Achievable sum-rate I(x; yhat over the solution's order). Empty order
/// gives 0.
double sum_rate(const ChannelSet& ch, const CompressionSolution& sol);
double sum_rate(const ChannelSet& ch, const CompressionSolution& sol, const std::vector<int>& active);

/// Vertex of the Berger-Tung backhaul region for permutation `order`:
/// C_{pi(i)} = I(y_{pi(i)}; yhat_{pi(i)} | yhat_{pi(1..i-1)}).
std::vector<double> vertex_rates(const std::vector<int>& order, const ChannelSet& ch,
                                 const CompressionSolution& sol);

struct RegionReport {
    bool feasible = true;
    std::vector<int> worst_subset;  // most violated subset when infeasible
    double worst_slack = 0.0;       // min over subsets of (sum C_j - I_S)
};

/// Full 2^N check of sum_{j in S} C_j >= I(y_S; yhat_S | yhat_Sbar) over the
/// solution's order set. Throws SizeError beyond 12 BSs. `capacities` is
/// indexed by BS id.
RegionReport region_check(const CompressionSolution& sol, const std::vector<double>& capacities,
                          const ChannelSet& ch);

}  // namespace cran
