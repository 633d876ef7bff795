#pragma once

// Isospectral and isoradial reduction, the block-companion spectral-radius
// identity, row-independent-closure bounds on the joint spectral radius of
// the discretized families, and the asymptotic-radius checker.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "delaygauge/eigen.hpp"
#include "delaygauge/matrix.hpp"
#include "delaygauge/stability.hpp"

namespace delaygauge {

class reduction_pole_error : public std::runtime_error {
public:
    explicit reduction_pole_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

template <typename T>
Matrix<T> submatrix(const Matrix<T>& b, const std::vector<std::size_t>& rows,
                    const std::vector<std::size_t>& cols) {
    Matrix<T> out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = b(rows[i], cols[j]);
    return out;
}

inline std::vector<std::size_t> complement(const std::vector<std::size_t>& s, std::size_t n) {
    std::vector<bool> in(n, false);
    for (auto i : s) {
        if (i >= n) throw std::invalid_argument("index set out of range");
        in[i] = true;
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

}  // namespace detail

/// Numeric isospectral reduction B_SS - B_SSbar (B_SbarSbar - lambda I)^{-1} B_SbarS
/// evaluated at a fixed lambda.
inline CMatrix isospectral_reduce(const CMatrix& b, const std::vector<std::size_t>& s,
                                  complexd lambda) {
    if (!b.square()) throw std::invalid_argument("isospectral_reduce: matrix must be square");
    const std::size_t n = b.rows();
    if (s.empty() || s.size() >= n)
        throw std::invalid_argument("isospectral_reduce: S must be a nonempty proper subset");
    const auto sb = detail::complement(s, n);

    const auto b_ss = detail::submatrix(b, s, s);
    const auto b_s_sb = detail::submatrix(b, s, sb);
    const auto b_sb_s = detail::submatrix(b, sb, s);
    auto b_sb_sb = detail::submatrix(b, sb, sb);
    for (std::size_t i = 0; i < sb.size(); ++i) b_sb_sb(i, i) -= lambda;

    CMatrix solved;
    try {
        solved = solve_linear(b_sb_sb, b_sb_s);
    } catch (const singular_matrix_error&) {
        throw reduction_pole_error(
            "isospectral_reduce: lambda is an eigenvalue of the complement block (pole)");
    }
    return b_ss - b_s_sb * solved;
}

inline CMatrix isospectral_reduce(const RMatrix& b, const std::vector<std::size_t>& s,
                                  complexd lambda) {
    return isospectral_reduce(to_complex(b), s, lambda);
}

struct IsoradialResult {
    RMatrix reduced;
    double rho_original = 0.0;
    double rho_reduced = 0.0;
    bool radius_preserved = false;
};

/// Isoradial reduction of a nonnegative matrix: the isospectral reduction
/// evaluated at lambda = rho(B). Throws reduction_pole_error when it does not
/// exist for the given S.
inline IsoradialResult isoradial_reduce(const RMatrix& b, const std::vector<std::size_t>& s) {
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j)
            if (b(i, j) < 0)
                throw std::invalid_argument("isoradial_reduce: matrix must be nonnegative");
    IsoradialResult out;
    out.rho_original = spectrum(b).radius;
    const CMatrix red = isospectral_reduce(b, s, complexd(out.rho_original, 0.0));
    out.reduced = RMatrix(red.rows(), red.cols());
    for (std::size_t i = 0; i < red.rows(); ++i)
        for (std::size_t j = 0; j < red.cols(); ++j) out.reduced(i, j) = red(i, j).real();
    out.rho_reduced = spectrum(out.reduced).radius;
    out.radius_preserved =
        std::abs(out.rho_reduced - out.rho_original) <= 1e-8 * std::max(1.0, out.rho_original);
    return out;
}

namespace detail {

// Unique positive root of g(lambda) = rho(C(lambda)) - lambda for a map
// lambda -> C(lambda) with entrywise nonincreasing nonnegative entries.
template <typename MatrixAt>
double radius_fixed_point(MatrixAt&& c_at, double hi_guess, double tol = 1e-12) {
    double lo = 1e-8;
    // Small lambda can overflow the lambda^{-m} weights; an overflowed matrix
    // has infinite radius, so g > 0 there.
    auto radius_of = [&](double l) {
        const auto c = c_at(l);
        for (double v : c.data())
            if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        // rho >= max_abs / n for nonnegative matrices, so entries this large
        // decide the bisection sign without an (ill-conditioned) eigensolve.
        if (c.max_abs() > 1e100) return std::numeric_limits<double>::infinity();
        return spectrum(c).radius;
    };
    auto g = [&](double l) { return radius_of(l) - l; };
    if (g(lo) <= 0.0) return spectrum(c_at(lo)).radius;  // root at or below lo
    double hi = std::max(hi_guess, 2e-8);
    int guard = 0;
    while (g(hi) > 0.0) {
        hi *= 2.0;
        if (++guard > 200) throw std::runtime_error("radius_fixed_point: no bracket found");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

struct CompanionRadiusIdentity {
    double rho_direct = 0.0;
    double rho_reduced = 0.0;
    bool agree = false;
    bool iff_check = false;  // rho(A) < 1  <=>  rho(sum A_i) < 1
    bool vacuous = false;    // all blocks zero
};

/// Checks rho(A) = rho(sum_i rho(A)^{-i} A_i) for the nonnegative block
/// companion assembled from A_0..A_{n-1}, solving the fixed point by
/// bisection and comparing with a direct eigensolve.
inline CompanionRadiusIdentity companion_radius_identity(const std::vector<RMatrix>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("companion_radius_identity: no blocks");
    const std::size_t d = blocks.front().rows();
    const std::size_t n = blocks.size();
    for (const auto& a : blocks)
        if (a.rows() != d || a.cols() != d)
            throw std::invalid_argument("companion_radius_identity: block shape mismatch");

    CompanionRadiusIdentity out;
    double maxentry = 0.0;
    for (const auto& a : blocks) maxentry = std::max(maxentry, a.max_abs());
    if (maxentry == 0.0) {
        out.vacuous = true;
        out.iff_check = true;
        return out;
    }

    RMatrix big(n * d, n * d);
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) big(i, m * d + j) = blocks[m](i, j);
    for (std::size_t blk = 1; blk < n; ++blk)
        for (std::size_t i = 0; i < d; ++i) big(blk * d + i, (blk - 1) * d + i) = 1.0;
    out.rho_direct = spectrum(big).radius;

    auto c_at = [&](double l) {
        RMatrix c(d, d);
        double p = 1.0;
        for (std::size_t m = 0; m < n; ++m) {
            c += (1.0 / p) * blocks[m];
            p *= l;
        }
        return c;
    };
    out.rho_reduced = detail::radius_fixed_point(c_at, 10.0 * std::max(out.rho_direct, 1e-6));
    out.agree = std::abs(out.rho_direct - out.rho_reduced) <= 1e-8 * std::max(1.0, out.rho_direct);

    RMatrix sum(d, d);
    for (const auto& a : blocks) sum += a;
    const double rho_sum = spectrum(sum).radius;
    out.iff_check = (out.rho_direct < 1.0) == (rho_sum < 1.0);
    return out;
}

struct RicSupResult {
    double sup_rho = 0.0;
    std::vector<std::size_t> argmax;  // flattened n_{i,j}, i major
    bool exact = false;               // full enumeration completed
    std::size_t evaluated = 0;
    std::size_t total = 0;
    bool family_nonnegative = true;
};

/// Supremum of spectral radii over the row-independent closure of the
/// discretized family, evaluated through the reduced d x d fixed point of the
/// companion identity. With the cap exceeded, a random sample is taken and
/// the result is only a lower bound of the supremum.
inline RicSupResult ric_sup_radius(const BoundMatrices& b, double tau, std::size_t n_tau,
                                   std::size_t cap = 1000000, unsigned seed = 12345) {
    b.validate();
    const std::size_t d = b.dim();
    const std::size_t r = b.delay_count();

    const RMatrix e = expm(b.m0, tau);
    RMatrix e_minus_i = e;
    for (std::size_t i = 0; i < d; ++i) e_minus_i(i, i) -= 1.0;
    const RMatrix kernel = solve_linear(b.m0, e_minus_i);
    std::vector<RMatrix> bi;  // B_i = M0^{-1}(e^{M0 tau}-I) M_i
    bi.reserve(r);
    for (const auto& m : b.mi) bi.push_back(kernel * m);

    RicSupResult out;
    for (const auto& m : bi)
        for (const auto& v : m.data())
            if (v < -1e-12) out.family_nonnegative = false;
    for (const auto& v : e.data())
        if (v < -1e-12) out.family_nonnegative = false;

    const std::size_t slots = r * d;  // one index per (delay, row)
    double total = std::pow(static_cast<double>(n_tau + 1), static_cast<double>(slots));
    const bool enumerate = total <= static_cast<double>(cap);
    out.total = static_cast<std::size_t>(std::min(total, 1e18));
    out.exact = enumerate;

    std::vector<std::size_t> assign(slots, 0);
    auto rho_of_assignment = [&](const std::vector<std::size_t>& a) {
        auto c_at = [&](double l) {
            RMatrix c = e;
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    const double w = std::pow(l, -static_cast<double>(a[i * d + j]));
                    for (std::size_t col = 0; col < d; ++col) c(j, col) += w * bi[i](j, col);
                }
            return c;
        };
        return detail::radius_fixed_point(c_at, 2.0);
    };

    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n_tau);
    const std::size_t trials = enumerate ? out.total : cap;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        if (enumerate) {
            std::size_t rem = trial;
            for (std::size_t sidx = 0; sidx < slots; ++sidx) {
                assign[sidx] = rem % (n_tau + 1);
                rem /= (n_tau + 1);
            }
        } else {
            for (auto& v : assign) v = pick(rng);
        }
        const double rho = rho_of_assignment(assign);
        ++out.evaluated;
        if (rho > out.sup_rho) {
            out.sup_rho = rho;
            out.argmax = assign;
        }
    }
    return out;
}

struct JsrTrendRow {
    std::size_t n = 0;
    double tau = 0.0;
    double sup_rho = 0.0;
    double beta_hat = 0.0;  // n * (1 - sup_rho)
    bool exact = false;
};

/// For each n, builds the family at tau = t0/n with n_tau = n lattice slots
/// and reports the RIC supremum radius and the empirical margin n*(1-rho).
inline std::vector<JsrTrendRow> jsr_trend(const BoundMatrices& b, double t0,
                                          const std::vector<std::size_t>& n_list,
                                          std::size_t cap = 1000000) {
    std::vector<JsrTrendRow> rows;
    rows.reserve(n_list.size());
    for (auto n : n_list) {
        JsrTrendRow row;
        row.n = n;
        row.tau = t0 / static_cast<double>(n);
        const auto res = ric_sup_radius(b, row.tau, n, cap);
        row.sup_rho = res.sup_rho;
        row.beta_hat = static_cast<double>(n) * (1.0 - res.sup_rho);
        row.exact = res.exact;
        rows.push_back(row);
    }
    return rows;
}

struct AsymptoticRadiusRow {
    std::size_t n = 0;
    double rho = 0.0;    // rho(I + A/n)
    double error = 0.0;  // n * |rho - 1 - alpha(A)/n|
};

struct AsymptoticRadiusCheck {
    std::vector<AsymptoticRadiusRow> rows;
    bool decreasing = false;  // within the 1e-12 comparison tolerance
};

/// Checks the expansion rho(I + A/n) = 1 + alpha(A)/n + o(1/n): the scaled
/// error column must be nonincreasing along the (geometric) n list.
inline AsymptoticRadiusCheck asymptotic_radius_check(const RMatrix& a,
                                                     const std::vector<std::size_t>& n_list) {
    const double alpha = spectrum(a).abscissa;
    AsymptoticRadiusCheck out;
    for (auto n : n_list) {
        RMatrix m = (1.0 / static_cast<double>(n)) * a;
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
        AsymptoticRadiusRow row;
        row.n = n;
        row.rho = spectrum(m).radius;
        row.error = static_cast<double>(n) *
                    std::abs(row.rho - 1.0 - alpha / static_cast<double>(n));
        out.rows.push_back(row);
    }
    out.decreasing = true;
    for (std::size_t k = 1; k < out.rows.size(); ++k)
        if (out.rows[k].error > out.rows[k - 1].error + 1e-12) out.decreasing = false;
    return out;
}

}  // namespace delaygauge
