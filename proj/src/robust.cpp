#include "cran/robust.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cran/errors.hpp"
#include "cran/rng.hpp"

namespace cran {

namespace {

double min_eigenvalue(const HermitianMatrix& m) {
    if (m.dim() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

bool UncertaintyBounds::consistent_with(const HermitianMatrix& nominal_form, double slack) const {
    return lower >= -min_eigenvalue(nominal_form) - slack;
}

UncertaintyBounds UncertaintyBounds::clamped_for(const HermitianMatrix& nominal_form) const {
    UncertaintyBounds b = *this;
    b.lower = std::min(0.0, std::max(lower, -min_eigenvalue(nominal_form)));
    return b;
}

QsCoeffs qs_coeffs(double mu, double level, const UncertaintyBounds& bounds) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("qs_coeffs: mu must lie in (0, 1)");
    const double cl = level + bounds.lower;
    const double cu = level + bounds.upper;
    if (cl <= 0.0 || cu <= 0.0)
        throw NumericalError("qs_coeffs: infeasible bounds (level + bound <= 0)");
    QsCoeffs qs;
    qs.q = cu * (1.0 + mu + (mu - 1.0) * cl) / (mu * cu * cl);
    qs.s = (mu * cu + 1.0 - cl) / (mu * cu * cl);
    return qs;
}

namespace {

enum Selector { kZero = 0, kRootPlus = 1, kRootMinus = 2 };

struct StreamCandidates {
    double alpha[3] = {0.0, 0.0, 0.0};
    bool valid[3] = {false, false, false};
};

StreamCandidates stream_candidates(const QsCoeffs& qs) {
    StreamCandidates c;
    c.valid[kZero] = qs.s >= 0.0;
    const double disc = qs.q * qs.q - 4.0 * qs.s;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double root_plus = 0.5 * (-qs.q + sq);
        const double root_minus = 0.5 * (-qs.q - sq);
        if (root_plus > 0.0 && (qs.s < 0.0 || qs.q < 0.0)) {
            c.valid[kRootPlus] = true;
            c.alpha[kRootPlus] = root_plus;
        }
        if (qs.q <= 0.0 && qs.s >= 0.0) {
            c.valid[kRootMinus] = true;
            c.alpha[kRootMinus] = std::max(root_minus, 0.0);
        }
    }
    return c;
}

}  // namespace

std::vector<double> candidate_set(double mu, double level, const UncertaintyBounds& bounds) {
    const StreamCandidates c = stream_candidates(qs_coeffs(mu, level, bounds));
    std::vector<double> out;
    if (c.valid[kRootPlus]) out.push_back(c.alpha[kRootPlus]);
    if (c.valid[kRootMinus]) out.push_back(c.alpha[kRootMinus]);
    if (c.valid[kZero]) out.push_back(0.0);
    return out;
}

namespace {

// Log-spaced points toward mu -> 0 catch large budgets (gains blow up as
// 1/mu); the linear half resolves the small-budget crossings near the
// all-zero threshold. Every per-stream branch boundary (S sign change, Q
// sign change, discriminant collapse) is inserted exactly, so candidate
// branches never appear or vanish strictly inside a cell.
std::vector<double> make_mu_grid(const RealVector& levels, const UncertaintyBounds& bounds) {
    std::vector<double> grid;
    grid.reserve(2100);
    const double lo = 1e-9, split = 1e-1, hi = 1.0 - 1e-9;
    const int n_log = 1000, n_lin = 1000;
    for (int i = 0; i < n_log; ++i)
        grid.push_back(lo * std::pow(split / lo, static_cast<double>(i) / n_log));
    for (int i = 0; i <= n_lin; ++i)
        grid.push_back(split + (hi - split) * static_cast<double>(i) / n_lin);

    auto add = [&](double mu) {
        if (mu > lo && mu < hi) grid.push_back(mu);
    };
    for (Eigen::Index l = 0; l < levels.size(); ++l) {
        const double cl = levels[l] + bounds.lower;
        const double cu = levels[l] + bounds.upper;
        add((cl - 1.0) / cu);          // S = 0
        add((cl - 1.0) / (cl + 1.0));  // Q = 0
        // disc = 0 reduces to cu(1-cl) mu^2 + 2[cu(1+cl) - 2cl] mu + cu(1-cl).
        const double a = cu * (1.0 - cl);
        if (std::abs(a) > 1e-14) {
            const double b_half = cu * (1.0 + cl) - 2.0 * cl;
            const double disc = b_half * b_half - a * a;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                add((-b_half + sq) / a);
                add((-b_half - sq) / a);
            }
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

struct PatternEval {
    bool valid = false;
    double budget = 0.0;  // g^U
    std::vector<double> alpha;
};

PatternEval eval_pattern(double mu, const std::vector<int>& pattern, const RealVector& levels,
                         const UncertaintyBounds& bounds) {
    PatternEval ev;
    ev.alpha.resize(pattern.size());
    for (std::size_t l = 0; l < pattern.size(); ++l) {
        const StreamCandidates c = stream_candidates(qs_coeffs(mu, levels[l], bounds));
        if (!c.valid[pattern[l]]) return ev;
        ev.alpha[l] = c.alpha[pattern[l]];
        ev.budget += std::log2(1.0 + ev.alpha[l] * (levels[l] + bounds.upper));
    }
    ev.valid = true;
    return ev;
}

bool selector_valid_at(double mu, double level, int sel, const UncertaintyBounds& bounds) {
    return stream_candidates(qs_coeffs(mu, level, bounds)).valid[sel];
}

// Validity interval of one stream's selector inside a grid cell. Candidate
// branches are born or die as the discriminant and coefficient signs move
// with mu; when that happens mid-cell the boundary is located by bisection so
// budget crossings hugging a branch collapse are still reachable.
struct SelectorWindow {
    double lo = 0.0, hi = 0.0;
    bool ok = false;
};

SelectorWindow selector_window(double mu_a, double mu_b, double level, int sel,
                               bool valid_a, bool valid_b, const UncertaintyBounds& bounds) {
    SelectorWindow w;
    if (!valid_a && !valid_b) return w;
    w.ok = true;
    if (valid_a && valid_b) {
        w.lo = mu_a;
        w.hi = mu_b;
        return w;
    }
    double lo = mu_a, hi = mu_b;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (selector_valid_at(mid, level, sel, bounds) == valid_a)
            lo = mid;
        else
            hi = mid;
    }
    if (valid_a) {
        w.lo = mu_a;
        w.hi = lo;  // last known-valid point before the branch dies
    } else {
        w.lo = hi;
        w.hi = mu_b;
    }
    return w;
}

double pattern_objective(const std::vector<double>& alpha, const RealVector& levels,
                         const UncertaintyBounds& bounds) {
    double obj = 0.0;
    for (std::size_t l = 0; l < alpha.size(); ++l)
        obj += std::log2(1.0 + alpha[l] * (levels[l] + bounds.lower)) - std::log2(1.0 + alpha[l]);
    return obj;
}

}  // namespace

RobustDesign robust_compress_form(const HermitianMatrix& nominal_form, double capacity_bits,
                                  const UncertaintyBounds& bounds) {
    if (capacity_bits < 0.0) throw std::invalid_argument("robust_compress: negative budget");
    if (bounds.lower > 0.0 || bounds.upper < 0.0)
        throw std::invalid_argument("robust_compress: bounds must satisfy lower <= 0 <= upper");

    EigenPair ep = eig_desc(nominal_form);
    const Eigen::Index n = ep.values.size();
    RealVector levels = ep.values.array().max(0.0) + 1.0;
    for (Eigen::Index l = 0; l < n; ++l)
        if (levels[l] + bounds.lower <= 0.0)
            throw NumericalError("robust_compress: bounds infeasible for the nominal form");

    RobustDesign out;
    if (capacity_bits == 0.0) {
        out.entry = BsDesign::zero(n);
        out.entry.stream_levels = levels;
        out.entry.basis = ep.basis;
        return out;
    }

    const std::vector<double> grid = make_mu_grid(levels, bounds);
    std::vector<StreamCandidates> at_a(n), at_b(n);
    for (Eigen::Index l = 0; l < n; ++l)
        at_b[l] = stream_candidates(qs_coeffs(grid[0], levels[l], bounds));

    bool found = false;
    double best_obj = -std::numeric_limits<double>::infinity();
    double best_mu = 0.0;
    std::vector<double> best_alpha;
    double nearest_budget = 0.0;
    double nearest_miss = std::numeric_limits<double>::infinity();
    double nearest_mu = 0.0;
    std::vector<int> nearest_pattern;

    std::vector<int> avail_flat;  // selectors valid at either cell end, per stream
    std::vector<int> avail_off(n + 1, 0);
    std::vector<int> pattern(n), idx(n);
    std::vector<SelectorWindow> windows(static_cast<std::size_t>(n) * 3);
    std::vector<char> window_done(static_cast<std::size_t>(n) * 3);

    auto note_budget = [&](double mu, double budget) {
        const double miss = std::abs(budget - capacity_bits);
        if (miss < nearest_miss) {
            nearest_miss = miss;
            nearest_budget = budget;
            nearest_mu = mu;
            nearest_pattern = pattern;
        }
    };
    auto consider = [&](double mu, const PatternEval& ev) {
        note_budget(mu, ev.budget);
        if (std::abs(ev.budget - capacity_bits) <= 1e-9) {
            const double obj = pattern_objective(ev.alpha, levels, bounds);
            if (!found || obj > best_obj + 1e-12) {
                found = true;
                best_obj = obj;
                best_mu = mu;
                best_alpha = ev.alpha;
            }
        }
    };

    for (std::size_t cell = 0; cell + 1 < grid.size(); ++cell) {
        const double mu_a = grid[cell], mu_b = grid[cell + 1];
        at_a.swap(at_b);
        for (Eigen::Index l = 0; l < n; ++l)
            at_b[l] = stream_candidates(qs_coeffs(mu_b, levels[l], bounds));

        avail_flat.clear();
        bool cell_ok = true;
        for (Eigen::Index l = 0; l < n; ++l) {
            avail_off[l] = static_cast<int>(avail_flat.size());
            for (int s = 0; s < 3; ++s)
                if (at_a[l].valid[s] || at_b[l].valid[s]) avail_flat.push_back(s);
            if (avail_off[l] == static_cast<int>(avail_flat.size())) cell_ok = false;
        }
        if (!cell_ok) continue;
        avail_off[n] = static_cast<int>(avail_flat.size());
        std::fill(window_done.begin(), window_done.end(), 0);

        // Odometer over the selector product.
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            double lo = mu_a, hi = mu_b;
            bool usable = true;
            for (Eigen::Index l = 0; l < n && usable; ++l) {
                const int s = avail_flat[avail_off[l] + idx[l]];
                pattern[l] = s;
                if (at_a[l].valid[s] && at_b[l].valid[s]) continue;
                const std::size_t key = static_cast<std::size_t>(l) * 3 + s;
                if (!window_done[key]) {
                    windows[key] = selector_window(mu_a, mu_b, levels[l], s, at_a[l].valid[s],
                                                   at_b[l].valid[s], bounds);
                    window_done[key] = 1;
                }
                if (!windows[key].ok) {
                    usable = false;
                    break;
                }
                lo = std::max(lo, windows[key].lo);
                hi = std::min(hi, windows[key].hi);
            }
            if (usable && lo < hi) {
                double gu_lo = 0.0, gu_hi = 0.0;
                bool ends_ok = true;
                if (lo == mu_a && hi == mu_b) {
                    for (Eigen::Index l = 0; l < n; ++l) {
                        const int s = pattern[l];
                        gu_lo += std::log2(1.0 + at_a[l].alpha[s] * (levels[l] + bounds.upper));
                        gu_hi += std::log2(1.0 + at_b[l].alpha[s] * (levels[l] + bounds.upper));
                    }
                } else {
                    const PatternEval ev_lo = eval_pattern(lo, pattern, levels, bounds);
                    const PatternEval ev_hi = eval_pattern(hi, pattern, levels, bounds);
                    ends_ok = ev_lo.valid && ev_hi.valid;
                    gu_lo = ev_lo.budget;
                    gu_hi = ev_hi.budget;
                }
                if (ends_ok) {
                    note_budget(lo, gu_lo);
                    note_budget(hi, gu_hi);
                    if ((gu_lo - capacity_bits) * (gu_hi - capacity_bits) <= 0.0) {
                        double b_lo = lo, b_hi = hi;
                        double f_lo = gu_lo - capacity_bits;
                        bool ok = true;
                        for (int it = 0; it < 100 && ok; ++it) {
                            const double mid = 0.5 * (b_lo + b_hi);
                            const PatternEval ev = eval_pattern(mid, pattern, levels, bounds);
                            if (!ev.valid) {
                                ok = false;
                                break;
                            }
                            const double f_mid = ev.budget - capacity_bits;
                            if ((f_lo <= 0.0) == (f_mid <= 0.0)) {
                                b_lo = mid;
                                f_lo = f_mid;
                            } else {
                                b_hi = mid;
                            }
                        }
                        if (ok) {
                            const double mu_star = 0.5 * (b_lo + b_hi);
                            const PatternEval ev = eval_pattern(mu_star, pattern, levels, bounds);
                            if (ev.valid) consider(mu_star, ev);
                        }
                    }
                }
            }
            // Advance the odometer.
            Eigen::Index k = 0;
            while (k < n) {
                if (++idx[k] < avail_off[k + 1] - avail_off[k]) break;
                idx[k] = 0;
                ++k;
            }
            if (k == n) break;
        }
    }

    if (!found && nearest_miss <= 1e-4 && !nearest_pattern.empty()) {
        // Grid quantization left the budget equality slightly off; accept the
        // nearest candidate rather than erroring out.
        const PatternEval ev = eval_pattern(nearest_mu, nearest_pattern, levels, bounds);
        if (ev.valid) {
            found = true;
            best_obj = pattern_objective(ev.alpha, levels, bounds);
            best_mu = nearest_mu;
            best_alpha = ev.alpha;
        }
    }
    if (!found) {
        throw NumericalError("robust_compress: no candidate attains the budget; nearest " +
                             std::to_string(nearest_budget) + " bits for target " +
                             std::to_string(capacity_bits));
    }

    RealVector gains = Eigen::Map<const RealVector>(best_alpha.data(), n);
    RobustDesign out_design;
    out_design.entry.omega = psd_from_eigen(ep.basis, gains);
    RealVector sqrt_gains = gains.array().sqrt();
    out_design.entry.gain = sqrt_gains.asDiagonal() * ep.basis.adjoint();
    out_design.entry.basis = ep.basis;
    out_design.entry.stream_gains = gains;
    out_design.entry.stream_levels = levels;
    out_design.entry.mu = best_mu;
    out_design.entry.backhaul_used = capacity_bits;
    out_design.worst_case_rate = best_obj;
    return out_design;
}

RobustDesign robust_compress(const Matrix& h, const HermitianMatrix& sigma_cond_hat,
                             double capacity_bits, const UncertaintyBounds& bounds) {
    return robust_compress_form(HermitianMatrix(h * sigma_cond_hat.mat() * h.adjoint()),
                                capacity_bits, bounds);
}

double robust_kkt_residual(const RobustDesign& design, const UncertaintyBounds& bounds) {
    const BsDesign& d = design.entry;
    if (d.stream_gains.size() == 0) return 0.0;
    if (d.mu <= 0.0) return d.stream_gains.maxCoeff() > 0.0 ? 1.0 : 0.0;
    double worst = 0.0;
    for (Eigen::Index l = 0; l < d.stream_gains.size(); ++l) {
        const QsCoeffs qs = qs_coeffs(d.mu, d.stream_levels[l], bounds);
        const double a = d.stream_gains[l];
        const double value = a * a + qs.q * a + qs.s;
        const double scale =
            std::max({1.0, a * a, std::abs(qs.q) * a, std::abs(qs.s)});
        if (a > 1e-12) {
            worst = std::max(worst, std::abs(value) / scale);
        } else {
            worst = std::max(worst, std::max(0.0, -value) / scale);
        }
    }
    return worst;
}

UncertaintySample sample_uncertainty(const Matrix& h, const HermitianMatrix& sigma_cond,
                                     std::uint64_t seed) {
    const Eigen::Index n_rx = h.rows();
    const HermitianMatrix true_form(h * sigma_cond.mat() * h.adjoint());

    UncertaintySample sample;
    sample.delta = HermitianMatrix::zero(n_rx);
    sample.bounds = UncertaintyBounds{0.0, 0.0};

    Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeThinU);
    const Eigen::Index rank = svd.rank();
    if (rank == 0) {
        sample.nominal_form = HermitianMatrix::psd(true_form.mat());
        return sample;
    }
    const Matrix q = svd.matrixU().leftCols(rank);

    // Smallest eigenvalue restricted to the column space of H bounds the
    // symmetric uncertainty that keeps the nominal form PSD.
    Eigen::SelfAdjointEigenSolver<Matrix> es(q.adjoint() * true_form.mat() * q,
                                             Eigen::EigenvaluesOnly);
    const double lambda_min = std::max(es.eigenvalues().minCoeff(), 0.0);
    if (lambda_min <= 1e-12) {
        sample.nominal_form = HermitianMatrix::psd(true_form.mat());
        return sample;
    }

    Rng rng(mix_seed(seed, {0x756e6365ULL}));
    // Haar unitary on the column space: QR of a Ginibre draw, phases fixed.
    Matrix g(rank, rank);
    for (Eigen::Index r = 0; r < rank; ++r)
        for (Eigen::Index c = 0; c < rank; ++c) g(r, c) = rng.cgauss();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix v = qr.householderQ() * Matrix::Identity(rank, rank);
    const Matrix r_mat = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < rank; ++c) {
        const Cplx d = r_mat(c, c);
        v.col(c) *= std::abs(d) > 0.0 ? d / std::abs(d) : Cplx(1.0, 0.0);
    }

    RealVector xi(rank);
    for (Eigen::Index k = 0; k < rank; ++k) xi[k] = rng.uniform(-lambda_min, lambda_min);

    const Matrix directions = q * v;
    sample.delta = HermitianMatrix(directions * xi.asDiagonal() * directions.adjoint());
    sample.nominal_form = HermitianMatrix::psd(true_form.mat() - sample.delta.mat());
    sample.bounds = UncertaintyBounds{-lambda_min, lambda_min};
    return sample;
}

}  // namespace cran
