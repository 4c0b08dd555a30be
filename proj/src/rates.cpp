#include "cran/rates.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <stdexcept>

#include "cran/errors.hpp"

namespace cran {

BsDesign BsDesign::zero(Eigen::Index dim) {
    BsDesign d;
    d.omega = HermitianMatrix::zero(dim);
    d.gain = Matrix::Zero(dim, dim);
    d.basis = Matrix::Identity(dim, dim);
    d.stream_gains = RealVector::Zero(dim);
    d.stream_levels = RealVector::Ones(dim);
    return d;
}

double side_rate_f_form(const HermitianMatrix& omega, const HermitianMatrix& form) {
    if (omega.dim() != form.dim()) throw std::invalid_argument("side_rate_f: dimension mismatch");
    // det(I + Omega B) = det(I + L^H Omega L) for B = L L^H keeps the
    // argument Hermitian PSD; B = form + I must be positive definite.
    Matrix b = form.mat();
    b.diagonal().array() += 1.0;
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() != Eigen::Success)
        throw NumericalError("side_rate_f: form + I is not positive definite");
    const Matrix l = llt.matrixL();
    return logdet_cap(HermitianMatrix(l.adjoint() * omega.mat() * l));
}

double side_rate_f(const HermitianMatrix& omega, const Matrix& h, const HermitianMatrix& sigma_cond) {
    if (h.cols() != sigma_cond.dim()) throw std::invalid_argument("side_rate_f: H width mismatch");
    return side_rate_f_form(omega, HermitianMatrix(h * sigma_cond.mat() * h.adjoint()));
}

double net_rate_form(const HermitianMatrix& omega, const HermitianMatrix& form) {
    return side_rate_f_form(omega, form) - logdet_cap(omega);
}

double net_rate(const HermitianMatrix& omega, const Matrix& h, const HermitianMatrix& sigma_cond) {
    return side_rate_f(omega, h, sigma_cond) - logdet_cap(omega);
}

DescriptionStack stack_descriptions(const ChannelSet& ch, const CompressionSolution& sol,
                                    const std::vector<int>& bss) {
    Eigen::Index rows = 0;
    for (int i : bss) rows += ch.h[i].rows();
    DescriptionStack stack;
    stack.h_bar = Matrix::Zero(rows, ch.n_tx());
    Matrix st = Matrix::Zero(rows, rows);
    Eigen::Index at = 0;
    for (int i : bss) {
        const Matrix& a = sol.entries[i].gain;
        const Eigen::Index n = ch.h[i].rows();
        stack.h_bar.middleRows(at, n) = a * ch.h[i];
        st.block(at, at, n, n) = a * a.adjoint() + Matrix::Identity(n, n);
        at += n;
    }
    stack.sigma_t = HermitianMatrix(st);
    return stack;
}

double mi_x_descriptions(const DescriptionStack& stack, const HermitianMatrix& sigma_cond) {
    if (stack.rows() == 0) return 0.0;
    const Matrix cov = stack.h_bar * sigma_cond.mat() * stack.h_bar.adjoint() + stack.sigma_t.mat();
    return logdet_pd(cov) - logdet_pd(stack.sigma_t.mat());
}

double mi_y_descriptions(const DescriptionStack& stack, const HermitianMatrix& sigma_cond) {
    if (stack.rows() == 0) return 0.0;
    const Matrix cov = stack.h_bar * sigma_cond.mat() * stack.h_bar.adjoint() + stack.sigma_t.mat();
    return logdet_pd(cov);
}

double sum_rate(const ChannelSet& ch, const CompressionSolution& sol) {
    return sum_rate(ch, sol, sol.order);
}

double sum_rate(const ChannelSet& ch, const CompressionSolution& sol, const std::vector<int>& active) {
    if (active.empty()) return 0.0;
    return mi_x_descriptions(stack_descriptions(ch, sol, active), ch.sigma_x);
}

std::vector<double> vertex_rates(const std::vector<int>& order, const ChannelSet& ch,
                                 const CompressionSolution& sol) {
    std::vector<double> rates;
    rates.reserve(order.size());
    std::vector<int> prior;
    for (int bs : order) {
        const auto stack = stack_descriptions(ch, sol, prior);
        const HermitianMatrix sigma_cond = cond_cov(ch.sigma_x, stack.h_bar, stack.sigma_t);
        rates.push_back(side_rate_f(sol.entries[bs].omega, ch.h[bs], sigma_cond));
        prior.push_back(bs);
    }
    return rates;
}

RegionReport region_check(const CompressionSolution& sol, const std::vector<double>& capacities,
                          const ChannelSet& ch) {
    const std::vector<int>& bss = sol.order;
    const int n = static_cast<int>(bss.size());
    if (n > 12) throw SizeError("region_check: subset enumeration capped at 12 BSs");

    RegionReport report;
    report.worst_slack = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> in, out;
        double cap_sum = 0.0;
        for (int k = 0; k < n; ++k) {
            if (mask & (1u << k)) {
                in.push_back(bss[k]);
                cap_sum += capacities[bss[k]];
            } else {
                out.push_back(bss[k]);
            }
        }
        const auto out_stack = stack_descriptions(ch, sol, out);
        const HermitianMatrix sigma_cond = cond_cov(ch.sigma_x, out_stack.h_bar, out_stack.sigma_t);
        const double need = mi_y_descriptions(stack_descriptions(ch, sol, in), sigma_cond);
        const double slack = cap_sum - need;
        if (slack < report.worst_slack) {
            report.worst_slack = slack;
            report.worst_subset = in;
        }
    }
    report.feasible = report.worst_slack >= -kRateTol;
    return report;
}

}  // namespace cran
