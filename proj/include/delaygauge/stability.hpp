#pragma once

// Stability matrix construction and the intrinsic-stability test, with
// sampling-based bound estimation and closed-form analyzers for the two
// delayed-reservoir families.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaygauge/eigen.hpp"
#include "delaygauge/matrix.hpp"
#include "delaygauge/system.hpp"

namespace delaygauge {

// M0 bounds abs*(D_x f); Mi bounds |D_{y_i} f|. For complex-valued systems a
// positive epsilon shift is added to the diagonal of M0.
struct BoundMatrices {
    RMatrix m0;
    std::vector<RMatrix> mi;
    double epsilon_shift = 0.0;
    bool heuristic = false;  // true when estimated by sampling rather than analytic

    std::size_t dim() const noexcept { return m0.rows(); }
    std::size_t delay_count() const noexcept { return mi.size(); }

    RMatrix sum() const {
        RMatrix s = m0;
        for (std::size_t i = 0; i < s.rows(); ++i) s(i, i) += epsilon_shift;
        for (const auto& m : mi) s += m;
        return s;
    }

    void validate() const {
        if (!m0.square()) throw std::invalid_argument("M0 must be square");
        for (const auto& m : mi)
            if (m.rows() != m0.rows() || m.cols() != m0.cols())
                throw std::invalid_argument("Mi dimension mismatch with M0");
    }
};

struct StabilityVerdict {
    RMatrix stability_matrix;
    double abscissa = 0.0;
    bool intrinsically_stable = false;
    double margin = 0.0;  // |abscissa|
    bool heuristic = false;
};

/// Assembles M = (M0 + eps*I) + sum Mi and decides alpha(M) < 0.
inline StabilityVerdict stability_matrix(const BoundMatrices& b) {
    b.validate();
    StabilityVerdict v;
    v.stability_matrix = b.sum();
    v.abscissa = spectrum(v.stability_matrix).abscissa;
    v.intrinsically_stable = v.abscissa < 0.0;
    v.margin = std::abs(v.abscissa);
    v.heuristic = b.heuristic;
    return v;
}

/// Epsilon shift for complex-valued systems: "small enough" realized as
/// min(1e-3, margin/10) where margin is the unshifted stability margin.
inline double choose_epsilon_shift(const BoundMatrices& b) {
    BoundMatrices unshifted = b;
    unshifted.epsilon_shift = 0.0;
    const auto v = stability_matrix(unshifted);
    if (!v.intrinsically_stable) return 1e-3;
    return std::min(1e-3, v.margin / 10.0);
}

struct SamplingBox {
    // One interval per scalar variable of (x, y_1, ..., y_r), flattened; or a
    // single interval applied to all.
    std::vector<std::pair<double, double>> intervals;
};

/// Finite-difference estimate of the bound matrices of a system over a box.
/// The result is an entrywise max over the sampled grid and is flagged as a
/// heuristic lower estimate of the true suprema.
inline BoundMatrices estimate_bounds_by_sampling(const SystemSpec& sys, const SamplingBox& box,
                                                 std::size_t grid_density,
                                                 const std::vector<double>& t_grid) {
    const std::size_t d = sys.dim();
    const std::size_t r = sys.delay_count();
    const std::size_t nvars = d * (r + 1);
    if (grid_density < 3) throw std::invalid_argument("grid density must be >= 3");
    std::vector<std::pair<double, double>> iv = box.intervals;
    if (iv.size() == 1) iv.assign(nvars, iv.front());
    if (iv.size() != nvars) throw std::invalid_argument("sampling box has wrong arity");

    BoundMatrices out;
    out.m0 = RMatrix(d, d, -std::numeric_limits<double>::infinity());
    out.mi.assign(r, RMatrix(d, d, 0.0));
    out.heuristic = true;

    auto eval = [&](const std::vector<double>& vars, double t) {
        std::vector<double> x(vars.begin(), vars.begin() + d);
        std::vector<std::vector<double>> y(r);
        for (std::size_t i = 0; i < r; ++i)
            y[i].assign(vars.begin() + d * (i + 1), vars.begin() + d * (i + 2));
        return sys.rhs(t, x, y);
    };

    std::vector<std::size_t> idx(nvars, 0);
    std::vector<double> vars(nvars);
    const auto npoints = static_cast<std::size_t>(std::pow(static_cast<double>(grid_density),
                                                           static_cast<double>(nvars)));
    for (std::size_t p = 0; p < npoints; ++p) {
        std::size_t rem = p;
        for (std::size_t v = 0; v < nvars; ++v) {
            idx[v] = rem % grid_density;
            rem /= grid_density;
            const auto [lo, hi] = iv[v];
            vars[v] = lo + (hi - lo) * static_cast<double>(idx[v]) / (grid_density - 1);
        }
        for (double t : t_grid) {
            for (std::size_t v = 0; v < nvars; ++v) {
                const double width = iv[v].second - iv[v].first;
                const double step = 1e-6 * std::max(width, 1e-6);
                auto vp = vars, vm = vars;
                vp[v] += step;
                vm[v] -= step;
                const auto fp = eval(vp, t), fm = eval(vm, t);
                const std::size_t block = v / d;   // 0 -> x, i -> y_i
                const std::size_t col = v % d;
                for (std::size_t row = 0; row < d; ++row) {
                    const double der = (fp[row] - fm[row]) / (2 * step);
                    if (!std::isfinite(der))
                        throw std::runtime_error("non-finite derivative sample at variable " +
                                                 std::to_string(v) + ", t=" + std::to_string(t));
                    if (block == 0) {
                        const double entry = (row == col) ? der : std::abs(der);
                        out.m0(row, col) = std::max(out.m0(row, col), entry);
                    } else {
                        auto& m = out.mi[block - 1];
                        m(row, col) = std::max(m(row, col), std::abs(der));
                    }
                }
            }
        }
    }
    return out;
}

/// Local stability matrix at a fixed point x*: same construction, but with
/// derivatives evaluated at (t, x*, ..., x*) only, sup over t_grid.
inline StabilityVerdict local_stability_matrix(const SystemSpec& sys,
                                               const std::vector<double>& x_star,
                                               const std::vector<double>& t_grid,
                                               double fd_step = 1e-6) {
    const std::size_t d = sys.dim();
    const std::size_t r = sys.delay_count();
    std::vector<std::vector<double>> y_star(r, x_star);
    for (double t : t_grid) {
        const auto res = sys.rhs(t, x_star, y_star);
        if (norm1(res) > 1e-8)
            throw std::invalid_argument("x* is not a fixed point: residual " +
                                        std::to_string(norm1(res)) + " at t=" + std::to_string(t));
    }

    BoundMatrices b;
    b.m0 = RMatrix(d, d, -std::numeric_limits<double>::infinity());
    b.mi.assign(r, RMatrix(d, d, 0.0));
    for (double t : t_grid) {
        for (std::size_t block = 0; block <= r; ++block) {
            for (std::size_t col = 0; col < d; ++col) {
                auto xp = x_star, xm = x_star;
                auto yp = y_star, ym = y_star;
                if (block == 0) { xp[col] += fd_step; xm[col] -= fd_step; }
                else { yp[block - 1][col] += fd_step; ym[block - 1][col] -= fd_step; }
                const auto fp = sys.rhs(t, xp, yp), fm = sys.rhs(t, xm, ym);
                for (std::size_t row = 0; row < d; ++row) {
                    const double der = (fp[row] - fm[row]) / (2 * fd_step);
                    if (block == 0) {
                        const double entry = (row == col) ? der : std::abs(der);
                        b.m0(row, col) = std::max(b.m0(row, col), entry);
                    } else {
                        b.mi[block - 1](row, col) = std::max(b.mi[block - 1](row, col),
                                                             std::abs(der));
                    }
                }
            }
        }
    }
    return stability_matrix(b);
}

struct Reservoir2Analysis {
    double delta_param = 0.0;  // Delta = sqrt(1 - 4*delta)
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;  // spectral abscissa
    double abscissa = 0.0;
    bool region_ok = false;  // 0 < beta < 1/2 and 0 < delta < 1/4 - beta^2
};

/// Closed-form spectral analysis of the sin^2 reservoir's stability matrix in
/// its diagonalizing coordinates.
inline Reservoir2Analysis reservoir2_analysis(double beta, double delta) {
    if (delta >= 0.25)
        throw std::domain_error("reservoir2_analysis: delta >= 1/4 makes Delta complex");
    Reservoir2Analysis a;
    const double big_delta = std::sqrt(1.0 - 4.0 * delta);
    a.delta_param = big_delta;
    const double disc = beta * beta / (big_delta * big_delta) - 2.0 * beta * big_delta +
                        big_delta * big_delta;
    const double root = std::sqrt(std::max(disc, 0.0));
    a.lambda_plus = 0.5 * (-1.0 + beta / big_delta + root);
    a.lambda_minus = 0.5 * (-1.0 + beta / big_delta - root);
    a.abscissa = a.lambda_plus;
    a.region_ok = (beta > 0.0 && beta < 0.5 && delta > 0.0 && delta < 0.25 - beta * beta);
    return a;
}

/// abscissa of the tanh reservoir's stability matrix g(rho*A - I); the
/// Perron-Frobenius closed form g*(rho-1) cross-checked against a direct
/// eigensolve.
inline double reservoir1_analysis(double g, double rho, const RMatrix& a) {
    if (g <= 0 || rho <= 0) throw std::domain_error("reservoir1_analysis: g, rho must be positive");
    const double ra = spectrum(a).radius;
    if (std::abs(ra - 1.0) > 1e-8)
        throw std::domain_error("reservoir1_analysis: A must have spectral radius 1 (got " +
                                std::to_string(ra) + "); rescale A");
    RMatrix m = rho * a;
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) -= 1.0;
    m *= g;
    const double direct = spectrum(m).abscissa;
    const double closed = g * (rho - 1.0);
    if (std::abs(direct - closed) > 1e-10 * std::max(1.0, std::abs(closed)))
        throw std::runtime_error("reservoir1_analysis: eigensolve disagrees with closed form");
    return closed;
}

}  // namespace delaygauge
