#pragma once

// LI_tau delay approximation, the block-companion matrices of the discretized
// linear system, the lattice evaluation map, and the semiconjugacy check
// between exact tau-stepping and companion-matrix action.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "delaygauge/delay.hpp"
#include "delaygauge/integrator.hpp"
#include "delaygauge/matrix.hpp"
#include "delaygauge/stability.hpp"

namespace delaygauge {

struct DelayApproximation {
    LiTauDelay li;
    double sup_error_bound = 0.0;  // tau + sampled modulus of continuity
};

/// Floor construction: n_{i,k} = floor(h_i(k*tau^+)/tau), continued linearly
/// with slope 1 on each interval. Guarantees sup|h - h_hat| <= tau + omega(tau)
/// with omega the sampled modulus of continuity on each continuity piece.
inline DelayApproximation approximate_delay(const DelaySignal& h, double tau, double t_prime,
                                            double t_end) {
    if (tau <= 0) throw std::invalid_argument("approximate_delay: tau must be positive");
    if (h.lattice() && h.lattice()->spacing > 0) {
        const double b = h.lattice()->spacing;
        const double q = b / tau;
        if (std::abs(q - std::round(q)) > 1e-12 * std::max(1.0, q))
            throw std::invalid_argument(
                "approximate_delay: tau must divide the discontinuity lattice spacing");
    }
    const std::size_t r = h.components();
    const auto n_tau = static_cast<std::size_t>(std::round(t_prime / tau));
    if (std::abs(n_tau * tau - t_prime) > 1e-9)
        throw std::invalid_argument("approximate_delay: T' must be a multiple of tau");
    const auto intervals = static_cast<std::size_t>(std::ceil(t_end / tau));

    DelayApproximation out;
    out.li.tau = tau;
    out.li.n_tau = n_tau;
    out.li.table.assign(r, std::vector<int>(intervals, 0));
    for (std::size_t k = 0; k < intervals; ++k) {
        // h(k*tau^+) realized as evaluation just right of the lattice point.
        const auto hv = h.evaluate(k * tau + 1e-12);
        for (std::size_t i = 0; i < r; ++i) {
            auto n = static_cast<int>(std::floor(hv[i] / tau + 1e-12));
            n = std::clamp(n, 0, static_cast<int>(n_tau));
            out.li.table[i][k] = n;
        }
    }

    // Sampled modulus of continuity at scale tau over each lattice interval.
    double omega = 0.0;
    const std::size_t fine = 16;
    for (std::size_t k = 0; k < intervals; ++k) {
        for (std::size_t j = 0; j < fine; ++j) {
            const double t = k * tau + tau * static_cast<double>(j) / fine + 1e-12;
            const double t2 = std::min(t + tau / fine, k * tau + tau - 1e-12);
            if (t2 <= t) continue;
            const auto a = h.evaluate(t), b = h.evaluate(t2);
            for (std::size_t i = 0; i < r; ++i)
                omega = std::max(omega, std::abs(a[i] - b[i]) * fine);
        }
    }
    out.sup_error_bound = tau + omega;
    return out;
}

inline DelaySignal to_signal(const LiTauDelay& li) { return DelaySignal(li); }

// One matrix of the discretized family: top row of blocks
// (e^{M0 tau} + N_0, N_1, ..., N_{n_tau}) over a subdiagonal of identities,
// with N_m = M0^{-1}(e^{M0 tau} - I) * sum_{n_i = m} M_i.
struct BlockCompanion {
    std::size_t d = 0;
    std::size_t n_tau = 0;
    std::vector<RMatrix> top;  // top[m], m = 0..n_tau; top[0] includes e^{M0 tau}
    RMatrix assembled;

    std::size_t size() const noexcept { return (n_tau + 1) * d; }
};

inline BlockCompanion build_companion(const BoundMatrices& b, double tau, std::size_t n_tau,
                                      const std::vector<std::size_t>& indices) {
    b.validate();
    if (indices.size() != b.delay_count())
        throw std::invalid_argument("build_companion: one index per delay required");
    for (auto n : indices)
        if (n > n_tau) throw std::invalid_argument("build_companion: index exceeds n_tau");

    const std::size_t d = b.dim();
    const RMatrix e = expm(b.m0, tau);
    RMatrix e_minus_i = e;
    for (std::size_t i = 0; i < d; ++i) e_minus_i(i, i) -= 1.0;
    const RMatrix kernel = solve_linear(b.m0, e_minus_i);

    BlockCompanion c;
    c.d = d;
    c.n_tau = n_tau;
    c.top.assign(n_tau + 1, RMatrix(d, d));
    for (std::size_t i = 0; i < indices.size(); ++i) c.top[indices[i]] += kernel * b.mi[i];
    c.top[0] += e;

    const std::size_t n = c.size();
    c.assembled = RMatrix(n, n);
    for (std::size_t m = 0; m <= n_tau; ++m)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c.assembled(i, m * d + j) = c.top[m](i, j);
    for (std::size_t blk = 1; blk <= n_tau; ++blk)
        for (std::size_t i = 0; i < d; ++i) c.assembled(blk * d + i, (blk - 1) * d + i) = 1.0;
    return c;
}

/// Companion for the interval-k indices of an LI_tau table.
inline BlockCompanion build_companion(const BoundMatrices& b, const LiTauDelay& li,
                                      std::size_t interval = 0) {
    std::vector<std::size_t> idx;
    idx.reserve(li.table.size());
    for (const auto& row : li.table) {
        if (interval >= row.size())
            throw std::out_of_range("build_companion: interval beyond LI_tau table");
        idx.push_back(static_cast<std::size_t>(row[interval]));
    }
    return build_companion(b, li.tau, li.n_tau, idx);
}

/// The lattice evaluation map: phi |-> (phi(0), phi(-tau), ..., phi(-n_tau*tau)).
inline std::vector<double> evaluation_map(const HistoryFunction& phi, double tau,
                                          std::size_t n_tau) {
    if (n_tau * tau > phi.horizon() + 1e-9)
        throw std::domain_error("evaluation_map: lattice exceeds the history domain");
    std::vector<double> out;
    out.reserve((n_tau + 1) * phi.dim());
    for (std::size_t m = 0; m <= n_tau; ++m) {
        const auto v = phi(-static_cast<double>(m) * tau);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

struct SemiconjugacyReport {
    double max_discrepancy = 0.0;
    double scale = 0.0;  // ||pi_tau(phi)||_1
    bool pass = false;
    std::size_t steps = 0;
};

/// Compares exact-step linear evolution of the lattice vector against
/// repeated companion-matrix multiplication over `steps` tau-steps.
inline SemiconjugacyReport verify_semiconjugacy(const BoundMatrices& b, const LiTauDelay& li,
                                                const HistoryFunction& phi, std::size_t steps) {
    const auto grid0 = evaluation_map(phi, li.tau, li.n_tau);
    const auto exact = exact_step_linear(b, li, grid0, steps);

    std::vector<double> v = grid0;
    SemiconjugacyReport rep;
    rep.steps = steps;
    rep.scale = norm1(grid0);
    for (std::size_t s = 0; s < steps; ++s) {
        const auto c = build_companion(b, li, s);
        v = c.assembled.apply(v);
        double diff = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) diff += std::abs(v[j] - exact[s + 1][j]);
        rep.max_discrepancy = std::max(rep.max_discrepancy, diff);
    }
    rep.pass = rep.max_discrepancy <= 1e-10 * std::max(rep.scale, 1e-30);
    return rep;
}

}  // namespace delaygauge
