#pragma once

#include <functional>
#include <vector>

#include "cran/rates.hpp"
#include "cran/solvers.hpp"

namespace cran {

/// Accumulated decoder side information for sequential compression: stacked
/// effective channels Hbar_j = A_j H_j, block-diagonal noise A_j A_j^H + I,
/// and the induced conditional transmit covariance Sigma_{x | yhat_S}.
/// Immutable snapshots; push() returns the state by value elsewhere -- here
/// the object mutates in place but recomputes Sigma_cond from scratch.
class SideInfoState {
  public:
    explicit SideInfoState(HermitianMatrix sigma_x);

    /// Appends the blocks of BS `bs` and recomputes the conditional
    /// covariance. Throws std::logic_error when `bs` was already pushed.
    void push(int bs, const Matrix& gain, const Matrix& h);

    const HermitianMatrix& sigma_cond() const { return sigma_cond_; }
    const HermitianMatrix& sigma_x() const { return sigma_x_; }
    const std::vector<int>& selected() const { return selected_; }
    const Matrix& h_stack() const { return h_stack_; }
    const HermitianMatrix& sigma_t() const { return sigma_t_; }

  private:
    HermitianMatrix sigma_x_;
    HermitianMatrix sigma_cond_;
    Matrix h_stack_;
    HermitianMatrix sigma_t_;
    std::vector<int> selected_;
};

/// Per-step single-BS design hook: receives the BS id, its channel, the
/// current side-information state and its backhaul budget, returns the
/// design. Lets the harness swap in robust / statistically-mismatched
/// solvers without changing the greedy loop.
using StepSolver =
    std::function<BsDesign(int bs, const Matrix& h, const SideInfoState& state, double capacity)>;

StepSolver make_max_rate_solver(bool use_side_info);
StepSolver make_mmse_solver(MmseVariant variant);

struct GreedyResult {
    CompressionSolution solution;        // entries indexed by BS id; order = pi
    std::vector<double> step_objectives; // phi* per step, in order
};

/// Greedy ordering: at each step every unselected BS is designed against the
/// current side information with its own budget; the BS with the largest
/// conditional net rate joins the order. Ties within 1e-9 bits go to the
/// lower index; all-zero channels are appended last with zero designs. Each
/// entry's backhaul_used is the conditional description rate consumed at its
/// step, so the order's vertex lies in the backhaul region by construction.
GreedyResult greedy_compress(const ChannelSet& ch, const std::vector<double>& capacities,
                             const StepSolver& solver);

}  // namespace cran
