#include "cran/greedy.hpp"

#include <algorithm>
#include <stdexcept>

namespace cran {

SideInfoState::SideInfoState(HermitianMatrix sigma_x)
    : sigma_x_(std::move(sigma_x)),
      sigma_cond_(HermitianMatrix::psd(sigma_x_.mat())),
      h_stack_(Matrix::Zero(0, sigma_x_.dim())),
      sigma_t_(HermitianMatrix::zero(0)) {}

void SideInfoState::push(int bs, const Matrix& gain, const Matrix& h) {
    if (std::find(selected_.begin(), selected_.end(), bs) != selected_.end())
        throw std::logic_error("SideInfoState: BS " + std::to_string(bs) + " pushed twice");
    const Eigen::Index old_rows = h_stack_.rows();
    const Eigen::Index add = h.rows();

    Matrix stack(old_rows + add, sigma_x_.dim());
    stack.topRows(old_rows) = h_stack_;
    stack.bottomRows(add) = gain * h;

    Matrix st = Matrix::Zero(old_rows + add, old_rows + add);
    st.topLeftCorner(old_rows, old_rows) = sigma_t_.mat();
    st.bottomRightCorner(add, add) = gain * gain.adjoint() + Matrix::Identity(add, add);

    h_stack_ = std::move(stack);
    sigma_t_ = HermitianMatrix(st);
    sigma_cond_ = cond_cov(sigma_x_, h_stack_, sigma_t_);
    selected_.push_back(bs);
}

StepSolver make_max_rate_solver(bool use_side_info) {
    return [use_side_info](int, const Matrix& h, const SideInfoState& state, double capacity) {
        return max_rate_compress(h, use_side_info ? state.sigma_cond() : state.sigma_x(), capacity);
    };
}

StepSolver make_mmse_solver(MmseVariant variant) {
    return [variant](int, const Matrix& h, const SideInfoState& state, double capacity) {
        return mmse_compress(h, state.sigma_x(), state.sigma_cond(), capacity, variant);
    };
}

GreedyResult greedy_compress(const ChannelSet& ch, const std::vector<double>& capacities,
                             const StepSolver& solver) {
    const int n = ch.n_bs();
    if (static_cast<int>(capacities.size()) != n)
        throw std::invalid_argument("greedy_compress: capacity list size mismatch");
    for (double c : capacities)
        if (c < 0.0) throw std::invalid_argument("greedy_compress: negative capacity");

    GreedyResult res;
    res.solution.entries.reserve(n);
    for (int i = 0; i < n; ++i) res.solution.entries.push_back(BsDesign::zero(ch.h[i].rows()));

    std::vector<int> live, dead;  // dead = all-zero channels, appended last
    for (int i = 0; i < n; ++i)
        (ch.h[i].norm() > 0.0 ? live : dead).push_back(i);

    SideInfoState state(ch.sigma_x);
    while (!live.empty()) {
        int best = -1;
        double best_phi = 0.0;
        BsDesign best_design;
        for (int bs : live) {
            BsDesign cand = solver(bs, ch.h[bs], state, capacities[bs]);
            const double phi = net_rate(cand.omega, ch.h[bs], state.sigma_cond());
            if (best < 0 || phi > best_phi + 1e-9) {
                best = bs;
                best_phi = phi;
                best_design = std::move(cand);
            }
        }
        // Vertex accounting: the budget actually consumed given the side
        // information accumulated so far.
        best_design.backhaul_used = side_rate_f(best_design.omega, ch.h[best], state.sigma_cond());
        state.push(best, best_design.gain, ch.h[best]);
        res.solution.entries[best] = std::move(best_design);
        res.solution.order.push_back(best);
        res.step_objectives.push_back(best_phi);
        live.erase(std::remove(live.begin(), live.end(), best), live.end());
    }
    for (int bs : dead) {
        res.solution.order.push_back(bs);
        res.step_objectives.push_back(0.0);
    }
    return res;
}

}  // namespace cran
