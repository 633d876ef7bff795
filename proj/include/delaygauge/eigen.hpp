#pragma once

// Nonsymmetric eigensolver: balancing, Householder reduction to Hessenberg
// form, and shifted QR iteration in complex arithmetic. Sized for the dense
// matrices this library produces (dimension up to a few hundred).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "delaygauge/matrix.hpp"

namespace delaygauge {

struct Spectrum {
    std::vector<complexd> eigenvalues;
    double radius = 0.0;    // max |lambda|
    double abscissa = 0.0;  // max Re(lambda)
};

class eigen_convergence_error : public std::runtime_error {
public:
    explicit eigen_convergence_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Parlett-Reinsch balancing with power-of-two scale factors.
inline void balance(CMatrix& a) {
    const std::size_t n = a.rows();
    const double radix = 2.0;
    bool converged = false;
    while (!converged) {
        converged = true;
        for (std::size_t i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / radix) { c *= radix; r /= radix; f *= radix; }
            while (c >= r * radix) { c /= radix; r *= radix; f /= radix; }
            if ((c + r) < 0.95 * s && f != 1.0) {
                converged = false;
                for (std::size_t j = 0; j < n; ++j) a(i, j) /= f;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

inline void hessenberg(CMatrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        // Householder vector annihilating a(k+2..n-1, k).
        double colnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) colnorm += std::norm(a(i, k));
        colnorm = std::sqrt(colnorm);
        if (colnorm == 0.0) continue;
        complexd alpha = a(k + 1, k);
        const double aa = std::abs(alpha);
        complexd phase = (aa == 0.0) ? complexd(1.0, 0.0) : alpha / aa;
        complexd beta = -phase * colnorm;
        std::vector<complexd> v(n, complexd{});
        v[k + 1] = alpha - beta;
        for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
        if (vnorm2 == 0.0) continue;

        // A <- (I - 2 v v* / |v|^2) A
        for (std::size_t j = k; j < n; ++j) {
            complexd s{};
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * a(i, j);
            s *= 2.0 / vnorm2;
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
        }
        // A <- A (I - 2 v v* / |v|^2)
        for (std::size_t i = 0; i < n; ++i) {
            complexd s{};
            for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            s *= 2.0 / vnorm2;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * std::conj(v[j]);
        }
        a(k + 1, k) = beta;
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = complexd{};
    }
}

inline complexd wilkinson_shift(const CMatrix& h, std::size_t hi) {
    // Eigenvalue of the trailing 2x2 block closest to h(hi,hi).
    const complexd a = h(hi - 1, hi - 1), b = h(hi - 1, hi);
    const complexd c = h(hi, hi - 1), d = h(hi, hi);
    const complexd tr = a + d;
    const complexd det = a * d - b * c;
    const complexd disc = std::sqrt(tr * tr - 4.0 * det);
    const complexd l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
    return (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
}

// Shifted QR on an upper Hessenberg matrix via Givens rotations.
inline std::vector<complexd> hessenberg_qr_eigenvalues(CMatrix h) {
    const std::size_t n = h.rows();
    std::vector<complexd> eigs;
    eigs.reserve(n);
    if (n == 0) return eigs;

    const double eps = 1e-16;
    std::size_t hi = n - 1;
    const std::size_t max_sweeps = 40 * n;  // iteration cap before declaring failure
    std::size_t sweeps = 0;
    std::size_t stagnant = 0;

    while (true) {
        // Deflate converged trailing eigenvalues.
        while (hi > 0) {
            const double off = std::abs(h(hi, hi - 1));
            const double scale = std::abs(h(hi - 1, hi - 1)) + std::abs(h(hi, hi));
            if (off <= eps * std::max(scale, 1e-300)) {
                h(hi, hi - 1) = complexd{};
                eigs.push_back(h(hi, hi));
                --hi;
                stagnant = 0;
            } else {
                break;
            }
        }
        if (hi == 0) { eigs.push_back(h(0, 0)); break; }

        // Active block [lo..hi]: smallest lo with no interior deflation point.
        std::size_t lo = hi;
        while (lo > 0) {
            const double off = std::abs(h(lo, lo - 1));
            const double scale = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (off <= eps * std::max(scale, 1e-300)) { h(lo, lo - 1) = complexd{}; break; }
            --lo;
        }

        if (++sweeps > max_sweeps)
            throw eigen_convergence_error("QR iteration failed to converge after " +
                                          std::to_string(max_sweeps) + " sweeps");

        complexd shift = wilkinson_shift(h, hi);
        // Occasional exceptional shift to break symmetry-induced cycles.
        if (++stagnant > 30) {
            shift = h(hi, hi) + complexd(std::abs(h(hi, hi - 1)), 0.0) * 1.3;
            stagnant = 0;
        }

        // One implicit single-shift QR sweep on [lo..hi], chasing the bulge
        // with interleaved row/column Givens rotations.
        complexd x = h(lo, lo) - shift;
        complexd y = h(lo + 1, lo);
        for (std::size_t k = lo; k < hi; ++k) {
            const double r = std::hypot(std::abs(x), std::abs(y));
            complexd c, s;
            if (r == 0.0) { c = 1.0; s = 0.0; }
            else { c = x / r; s = y / r; }
            // Rows k, k+1 (column k-1 holds the bulge when k > lo).
            for (std::size_t j = (k == lo ? lo : k - 1); j <= hi; ++j) {
                const complexd t1 = h(k, j), t2 = h(k + 1, j);
                h(k, j) = std::conj(c) * t1 + std::conj(s) * t2;
                h(k + 1, j) = -s * t1 + c * t2;
            }
            // Columns k, k+1 (row k+2 picks up the new bulge).
            const std::size_t top = std::min(hi, k + 2);
            for (std::size_t i = lo; i <= top; ++i) {
                const complexd t1 = h(i, k), t2 = h(i, k + 1);
                h(i, k) = t1 * c + t2 * s;
                h(i, k + 1) = -t1 * std::conj(s) + t2 * std::conj(c);
            }
            if (k + 1 < hi) { x = h(k + 1, k); y = h(k + 2, k); }
        }
    }
    return eigs;
}

}  // namespace detail

inline Spectrum spectrum(const CMatrix& a_in) {
    if (!a_in.square()) throw std::invalid_argument("spectrum: matrix must be square");
    if (!a_in.all_finite()) throw std::invalid_argument("spectrum: non-finite entries");
    CMatrix a = a_in;
    detail::balance(a);
    detail::hessenberg(a);
    Spectrum s;
    s.eigenvalues = detail::hessenberg_qr_eigenvalues(a);
    s.radius = 0.0;
    s.abscissa = -std::numeric_limits<double>::infinity();
    for (const auto& l : s.eigenvalues) {
        s.radius = std::max(s.radius, std::abs(l));
        s.abscissa = std::max(s.abscissa, l.real());
    }
    if (s.eigenvalues.empty()) s.abscissa = 0.0;
    return s;
}

inline Spectrum spectrum(const RMatrix& a) { return spectrum(to_complex(a)); }

inline double spectral_radius(const RMatrix& a) { return spectrum(a).radius; }
inline double spectral_abscissa(const RMatrix& a) { return spectrum(a).abscissa; }

}  // namespace delaygauge
