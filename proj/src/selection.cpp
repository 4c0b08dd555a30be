#include "cran/selection.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cran/errors.hpp"
#include "cran/rng.hpp"

namespace cran {

void SelectionConfig::validate() const {
    if (activation_cost < 0.0 || shared_backhaul < 0.0 || mbs_backhaul < 0.0)
        throw ConfigError("selection: negative cost or budget");
    if (activation_threshold <= 0.0) throw ConfigError("selection: activation threshold must be > 0");
    if (max_sweeps < 1) throw ConfigError("selection: max_sweeps must be >= 1");
    if (convergence_tol <= 0.0) throw ConfigError("selection: convergence tolerance must be > 0");
}

double penalized_gain(double level, double mu, double q_prime) {
    if (level <= 1e-12) return 0.0;
    if (q_prime < 1e-10) {
        // Unpenalized limit: rate-optimal water-filling gain.
        if (mu <= 0.0)
            return level > 1.0 + 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
        return std::max((1.0 - 1.0 / level) / mu - 1.0, 0.0);
    }
    const double a = q_prime * level;
    const double b = mu * level + q_prime * (level + 1.0);
    const double c0 = (mu - 1.0) * level + q_prime + 1.0;
    if (c0 >= 0.0) return 0.0;  // no positive stationary point
    return (-b + std::sqrt(b * b - 4.0 * a * c0)) / (2.0 * a);
}

namespace {

double used_bits(const RealVector& levels, const RealVector& gains) {
    double bits = 0.0;
    for (Eigen::Index l = 0; l < levels.size(); ++l)
        bits += std::log2(1.0 + levels[l] * gains[l]);
    return bits;
}

RealVector gains_at(const RealVector& levels, double mu, double q_prime) {
    RealVector g(levels.size());
    for (Eigen::Index l = 0; l < levels.size(); ++l) g[l] = penalized_gain(levels[l], mu, q_prime);
    return g;
}

}  // namespace

OmegaUpdate omega_update(int i, const ChannelSet& ch, const HermitianMatrix& sigma_cond_mbs,
                         const std::vector<BsDesign>& designs, const std::vector<int>& hbs_set,
                         const SelectionConfig& cfg) {
    cfg.validate();
    const Eigen::Index n_rx = ch.h[i].rows();
    const Eigen::Index n_tx = ch.n_tx();

    // Aggregate the other descriptions: W = sum_j H_j^H (I+Omega_j)^{-1} Omega_j H_j.
    Matrix w = Matrix::Zero(n_tx, n_tx);
    double others_logdet_cap = 0.0;
    for (int j : hbs_set) {
        if (j == i || !designs[j].active()) continue;
        const Matrix& omega_j = designs[j].omega.mat();
        Matrix eye_plus = omega_j;
        eye_plus.diagonal().array() += 1.0;
        Eigen::LLT<Matrix> llt(eye_plus);
        if (llt.info() != Eigen::Success)
            throw NumericalError("omega_update: I + Omega_j not positive definite");
        const Matrix m = llt.solve(omega_j);
        w += ch.h[j].adjoint() * (0.5 * (m + m.adjoint())) * ch.h[j];
        others_logdet_cap += logdet_cap(designs[j].omega);
    }

    // Hermitian route through Sigma^{1/2}: logdet R_i and the conditional
    // received covariance I + H_i R_i^{-1} Sigma H_i^H share the kernel
    // K = I + Sigma^{1/2} W Sigma^{1/2}.
    EigenPair sig_ep = eig_desc(sigma_cond_mbs);
    RealVector sqrt_vals = sig_ep.values.array().max(0.0).sqrt();
    const Matrix sig_half = sig_ep.basis * sqrt_vals.asDiagonal() * sig_ep.basis.adjoint();
    Matrix k = sig_half * (0.5 * (w + w.adjoint())) * sig_half;
    k = 0.5 * (k + k.adjoint());
    k.diagonal().array() += 1.0;
    const double logdet_r = logdet_pd(k);

    Eigen::LLT<Matrix> k_llt(k);
    if (k_llt.info() != Eigen::Success) throw NumericalError("omega_update: kernel not PD");
    const Matrix g = ch.h[i] * sig_half;
    const Matrix cond_form = g * k_llt.solve(g.adjoint());

    EigenPair ep = eig_desc(HermitianMatrix(cond_form));
    RealVector levels = ep.values.array().max(0.0) + 1.0;

    OmegaUpdate out;
    out.residual_budget = cfg.shared_backhaul - logdet_r - others_logdet_cap;

    if (out.residual_budget <= 1e-12) {
        out.design = BsDesign::zero(n_rx);
        out.design.basis = ep.basis;
        out.design.stream_levels = levels;
        return out;
    }

    const double q_prime = std::numbers::ln2 * cfg.activation_cost;
    const double cbar = out.residual_budget;

    double mu_star = 0.0;
    RealVector gains = gains_at(levels, 0.0, q_prime);
    if (used_bits(levels, gains) > cbar) {
        double hi = 1.0;
        while (used_bits(levels, gains_at(levels, hi, q_prime)) > cbar && hi < 1e18) hi *= 2.0;
        double lo = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (used_bits(levels, gains_at(levels, mid, q_prime)) > cbar)
                lo = mid;
            else
                hi = mid;
        }
        mu_star = hi;  // feasible side of the budget
        gains = gains_at(levels, mu_star, q_prime);
    }

    out.design.omega = psd_from_eigen(ep.basis, gains);
    RealVector sqrt_gains = gains.array().sqrt();
    out.design.gain = sqrt_gains.asDiagonal() * ep.basis.adjoint();
    out.design.basis = ep.basis;
    out.design.stream_gains = gains;
    out.design.stream_levels = levels;
    out.design.mu = mu_star;
    out.used_bits = used_bits(levels, gains);
    out.design.backhaul_used = out.used_bits;
    return out;
}

double selection_objective(const ChannelSet& ch, const HermitianMatrix& sigma_cond_mbs,
                           const CompressionSolution& sol, const std::vector<int>& hbs_set,
                           double activation_cost) {
    const auto stack = stack_descriptions(ch, sol, hbs_set);
    double penalty = 0.0;
    for (int i : hbs_set) penalty += sol.entries[i].omega.trace_real();
    return mi_x_descriptions(stack, sigma_cond_mbs) - activation_cost * penalty;
}

double shared_backhaul_usage(const ChannelSet& ch, const HermitianMatrix& sigma_cond_mbs,
                             const CompressionSolution& sol, const std::vector<int>& hbs_set) {
    return mi_y_descriptions(stack_descriptions(ch, sol, hbs_set), sigma_cond_mbs);
}

namespace {

HermitianMatrix mbs_conditional(const ChannelSet& ch, const BsDesign& mbs_design) {
    const Matrix h_bar = mbs_design.gain * ch.h[0];
    const HermitianMatrix sigma_t(mbs_design.gain * mbs_design.gain.adjoint() +
                                  Matrix::Identity(mbs_design.gain.rows(), mbs_design.gain.rows()));
    return cond_cov(ch.sigma_x, h_bar, sigma_t);
}

CompressionSolution zero_solution(const ChannelSet& ch, const BsDesign& mbs_design) {
    CompressionSolution sol;
    sol.entries.reserve(ch.n_bs());
    sol.entries.push_back(mbs_design);
    for (int i = 1; i < ch.n_bs(); ++i) sol.entries.push_back(BsDesign::zero(ch.h[i].rows()));
    return sol;
}

std::vector<double> bca_pass(const ChannelSet& ch, const SelectionConfig& cfg,
                             const HermitianMatrix& sigma_cond_mbs, CompressionSolution& sol,
                             const std::vector<int>& subset, double q_h) {
    SelectionConfig pass_cfg = cfg;
    pass_cfg.activation_cost = q_h;
    std::vector<double> trace;
    double prev = -std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        for (int i : subset)
            sol.entries[i] = omega_update(i, ch, sigma_cond_mbs, sol.entries, subset, pass_cfg).design;
        const double obj = selection_objective(ch, sigma_cond_mbs, sol, subset, q_h);
        trace.push_back(obj);
        if (sweep > 0 && std::abs(obj - prev) <= cfg.convergence_tol * std::max(1.0, std::abs(prev)))
            break;
        prev = obj;
    }
    return trace;
}

}  // namespace

SubsetOptimization optimize_subset(const ChannelSet& ch, const SelectionConfig& cfg,
                                   const std::vector<int>& subset, const BsDesign& mbs_design) {
    cfg.validate();
    const HermitianMatrix sigma_cond_mbs = mbs_conditional(ch, mbs_design);
    SubsetOptimization out;
    out.solution = zero_solution(ch, mbs_design);
    if (!subset.empty()) {
        out.penalized_trace =
            bca_pass(ch, cfg, sigma_cond_mbs, out.solution, subset, cfg.activation_cost);
        out.polish_trace = bca_pass(ch, cfg, sigma_cond_mbs, out.solution, subset, 0.0);
    }
    out.solution.order.push_back(0);
    for (int i : subset) out.solution.order.push_back(i);
    return out;
}

TwoPhaseResult two_phase_select(const ChannelSet& ch, const SelectionConfig& cfg,
                                const BsDesign& mbs_design) {
    cfg.validate();
    const HermitianMatrix sigma_cond_mbs = mbs_conditional(ch, mbs_design);

    std::vector<int> all_hbs;
    for (int i = 1; i < ch.n_bs(); ++i) all_hbs.push_back(i);

    TwoPhaseResult res;
    CompressionSolution phase1 = zero_solution(ch, mbs_design);
    res.phase1_trace = bca_pass(ch, cfg, sigma_cond_mbs, phase1, all_hbs, cfg.activation_cost);

    for (int i : all_hbs)
        if (phase1.entries[i].omega.trace_real() > cfg.activation_threshold)
            res.selected.push_back(i);

    res.phase2 = optimize_subset(ch, cfg, res.selected, mbs_design);
    res.solution = res.phase2.solution;
    return res;
}

namespace {

// C(n, k) with saturation at the exhaustive-search cap.
double n_choose_k(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v *= static_cast<double>(n - k + i) / i;
    return v;
}

}  // namespace

std::vector<int> baseline_select(const ChannelSet& ch, const SelectionConfig& cfg, int k,
                                 BaselineMode mode, std::uint64_t seed, const BsDesign& mbs_design) {
    std::vector<int> hbs;
    for (int i = 1; i < ch.n_bs(); ++i) hbs.push_back(i);
    const int n = static_cast<int>(hbs.size());
    if (k < 0 || k > n) throw std::invalid_argument("baseline_select: k out of range");
    if (k == 0) return {};

    switch (mode) {
        case BaselineMode::local: {
            std::vector<std::pair<double, int>> ranked;
            for (int i : hbs) {
                const double c_local =
                    logdet_cap(HermitianMatrix(ch.h[i] * ch.sigma_x.mat() * ch.h[i].adjoint()));
                ranked.emplace_back(-c_local, i);
            }
            std::sort(ranked.begin(), ranked.end());
            std::vector<int> out;
            for (int j = 0; j < k; ++j) out.push_back(ranked[j].second);
            std::sort(out.begin(), out.end());
            return out;
        }
        case BaselineMode::exhaustive: {
            if (n_choose_k(n, k) > 1e5)
                throw SizeError("baseline_select: exhaustive search over " +
                                std::to_string(n_choose_k(n, k)) + " subsets exceeds cap");
            const HermitianMatrix sigma_cond_mbs = mbs_conditional(ch, mbs_design);
            std::vector<int> combo(k);
            for (int j = 0; j < k; ++j) combo[j] = j;
            std::vector<int> best;
            double best_rate = -1.0;
            while (true) {
                std::vector<int> subset;
                for (int j : combo) subset.push_back(hbs[j]);
                const auto opt = optimize_subset(ch, cfg, subset, mbs_design);
                const double rate =
                    mi_x_descriptions(stack_descriptions(ch, opt.solution, subset), sigma_cond_mbs);
                if (rate > best_rate + 1e-12) {
                    best_rate = rate;
                    best = subset;
                }
                int j = k - 1;
                while (j >= 0 && combo[j] == n - k + j) --j;
                if (j < 0) break;
                ++combo[j];
                for (int m = j + 1; m < k; ++m) combo[m] = combo[m - 1] + 1;
            }
            return best;
        }
        case BaselineMode::random_pick: {
            Rng rng(mix_seed(seed, {0x72616e64ULL}));
            std::vector<int> pool = hbs;
            std::vector<int> out;
            for (int j = 0; j < k; ++j) {
                const auto pick = static_cast<std::size_t>(rng.below(pool.size()));
                out.push_back(pool[pick]);
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
            }
            std::sort(out.begin(), out.end());
            return out;
        }
    }
    throw std::logic_error("baseline_select: unknown mode");
}

}  // namespace cran
