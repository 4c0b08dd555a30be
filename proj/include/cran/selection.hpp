#pragma once

#include <cstdint>
#include <vector>

#include "cran/rates.hpp"

namespace cran {

/// Parameters of joint HBS selection and compression under a shared backhaul
/// pool. BS 0 is the MBS; BSs 1..N-1 are the HBSs competing for
/// `shared_backhaul` bits.
struct SelectionConfig {
    double activation_cost = 0.0;      // q_H, trace-penalty weight per HBS
    double shared_backhaul = 0.0;      // C_H bits shared by all HBSs
    double mbs_backhaul = 0.0;         // budget of the MBS design
    double activation_threshold = 1e-6;  // trace(Omega) above this counts as active
    int max_sweeps = 200;
    double convergence_tol = 1e-6;  // relative objective change per sweep

    void validate() const;
};

/// Outcome of one penalized water-filling block update.
struct OmegaUpdate {
    BsDesign design;
    double residual_budget = 0.0;  // Cbar_i left for this BS by the others
    double used_bits = 0.0;        // h_i(mu*), its conditional description rate
};

/// Block update of HBS `i` given the other HBSs' designs (Theorem-2 form):
/// conditional covariance of y_i given every other description, penalized
/// water-filling gains with q' = ln(2) q_H, and the residual shared budget
/// Cbar_i. Exhausted budget (Cbar <= 0) returns the zero design; q_H below
/// 1e-10 switches to the unpenalized gain formula.
OmegaUpdate omega_update(int i, const ChannelSet& ch, const HermitianMatrix& sigma_cond_mbs,
                         const std::vector<BsDesign>& designs, const std::vector<int>& hbs_set,
                         const SelectionConfig& cfg);

/// Penalized objective I(x; yhat_active | yhat_1) - q_H sum_i tr(Omega_i)
/// over the given HBS set, and the shared-backhaul usage
/// I(y_set; yhat_set | yhat_1).
double selection_objective(const ChannelSet& ch, const HermitianMatrix& sigma_cond_mbs,
                           const CompressionSolution& sol, const std::vector<int>& hbs_set,
                           double activation_cost);
double shared_backhaul_usage(const ChannelSet& ch, const HermitianMatrix& sigma_cond_mbs,
                             const CompressionSolution& sol, const std::vector<int>& hbs_set);

/// Block-coordinate ascent restricted to `subset`: a penalized pass from the
/// all-zero point (the trace penalty spreads the shared pool across BSs)
/// followed by an unpenalized polish warm-started from it. Objective traces
/// are nondecreasing within each pass.
struct SubsetOptimization {
    CompressionSolution solution;          // entries indexed by BS id, MBS at 0
    std::vector<double> penalized_trace;   // per sweep
    std::vector<double> polish_trace;      // per sweep, q_H = 0
};
SubsetOptimization optimize_subset(const ChannelSet& ch, const SelectionConfig& cfg,
                                   const std::vector<int>& subset, const BsDesign& mbs_design);

struct TwoPhaseResult {
    std::vector<int> selected;            // S_H*, ascending BS ids
    CompressionSolution solution;         // final designs (phase 2)
    std::vector<double> phase1_trace;     // penalized objective per sweep, all HBSs
    SubsetOptimization phase2;
};

/// Algorithm-2 style two-phase selection: sparsity-inducing block-coordinate
/// ascent over every HBS picks the active set, then the active set is
/// re-optimized without the penalty.
TwoPhaseResult two_phase_select(const ChannelSet& ch, const SelectionConfig& cfg,
                                const BsDesign& mbs_design);

enum class BaselineMode { local, exhaustive, random_pick };

/// Comparison subset rules: `local` ranks HBSs by their single-BS capacity
/// log2 det(I + H_i Sigma_x H_i^H), `exhaustive` optimizes every k-subset
/// through optimize_subset and keeps the best conditional rate (capped at
/// 1e5 combinations), `random_pick` is a seed-deterministic draw.
std::vector<int> baseline_select(const ChannelSet& ch, const SelectionConfig& cfg, int k,
                                 BaselineMode mode, std::uint64_t seed, const BsDesign& mbs_design);

/// Per-stream penalized water-filling gain of the block update
/// (q_prime = ln(2) q_H; the q_prime -> 0 limit is the rate-optimal gain).
double penalized_gain(double level, double mu, double q_prime);

}  // namespace cran
