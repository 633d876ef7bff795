#pragma once

// Catalog of concrete DDE systems with analytic bound matrices: the two
// sin-coupled examples, the tanh reservoir, and the sin^2 reservoir.

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaygauge/stability.hpp"
#include "delaygauge/system.hpp"

namespace delaygauge {

struct CatalogEntry {
    SystemSpec system;
    BoundMatrices bounds;
};

struct CatalogParams {
    // reservoir1
    double g = 1.0;
    double rho = 0.9;
    RMatrix a{{0.0, 1.0}, {1.0, 0.0}};
    // reservoir2
    double beta = 1.0 / 3.0;
    double delta = 1.0 / 8.0;
    double phase = 1.0;
    double gain = 7.0;
    std::size_t delay_count = 3;
    // shared
    double delay_bound = 6.0;
    std::function<double(double)> input;  // J(t) or scalar u(t); default 0
};

namespace detail {

inline std::vector<double> matvec(const RMatrix& m, const std::vector<double>& x) {
    return m.apply(x);
}

}  // namespace detail

/// x'(t) = A x(t) + sin(B x(t-h)) with A = -I, B = [[-5/4,1/4],[1/4,-5/4]].
/// Not intrinsically stable: alpha(M) = 1/2.
inline CatalogEntry catalog_nis_example(const CatalogParams& p) {
    const RMatrix a{{-1.0, 0.0}, {0.0, -1.0}};
    const RMatrix b{{-1.25, 0.25}, {0.25, -1.25}};
    SystemSpec sys(2, 1, p.delay_bound,
                   [a, b](double, const std::vector<double>& x,
                          const std::vector<std::vector<double>>& y) {
                       auto ax = detail::matvec(a, x);
                       auto by = detail::matvec(b, y.at(0));
                       return std::vector<double>{ax[0] + std::sin(by[0]), ax[1] + std::sin(by[1])};
                   });
    sys.set_name("nis-example");
    sys.set_lipschitz_constant(1.5);  // max induced-1 norm of A, B
    BoundMatrices bounds;
    bounds.m0 = abs_star(a);
    bounds.mi = {entrywise_abs(b)};
    return {sys, bounds};
}

/// Same form with A = [[-4,0],[-1,-1]], B = [[-1,1],[1,0]]. Intrinsically
/// stable: alpha(M) = -2 + sqrt(3).
inline CatalogEntry catalog_is_example(const CatalogParams& p) {
    const RMatrix a{{-4.0, 0.0}, {-1.0, -1.0}};
    const RMatrix b{{-1.0, 1.0}, {1.0, 0.0}};
    SystemSpec sys(2, 1, p.delay_bound,
                   [a, b](double, const std::vector<double>& x,
                          const std::vector<std::vector<double>>& y) {
                       auto ax = detail::matvec(a, x);
                       auto by = detail::matvec(b, y.at(0));
                       return std::vector<double>{ax[0] + std::sin(by[0]), ax[1] + std::sin(by[1])};
                   });
    sys.set_name("is-example");
    sys.set_lipschitz_constant(5.0);
    BoundMatrices bounds;
    bounds.m0 = abs_star(a);
    bounds.mi = {entrywise_abs(b)};
    return {sys, bounds};
}

/// Delayed tanh reservoir x' = -g(x + tanh(rho*A*x(t-h) + sigma*W*u(t))).
/// Bound matrices: M0 = -g*I, M1 = g*rho*A, so M = g(rho*A - I).
inline CatalogEntry catalog_reservoir1(const CatalogParams& p) {
    const double ra = spectrum(p.a).radius;
    if (std::abs(ra - 1.0) > 1e-8)
        throw std::invalid_argument("reservoir1: A must have spectral radius 1");
    const std::size_t n = p.a.rows();
    const RMatrix a = p.a;
    const double g = p.g, rho = p.rho;
    SystemSpec sys(n, 1, p.delay_bound,
                   [a, g, rho, n](double, const std::vector<double>& x,
                                  const std::vector<std::vector<double>>& y) {
                       auto ay = detail::matvec(a, y.at(0));
                       std::vector<double> out(n);
                       for (std::size_t i = 0; i < n; ++i)
                           out[i] = -g * (x[i] + std::tanh(rho * ay[i]));
                       return out;
                   });
    sys.set_name("reservoir1");
    BoundMatrices bounds;
    bounds.m0 = RMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) bounds.m0(i, i) = -g;
    bounds.mi = {g * rho * a};
    return {sys, bounds};
}

/// The sin^2 reservoir of the delayed reservoir-computing example. The bound
/// matrices are those of the system in its diagonalizing coordinates, where
/// the intrinsic-stability analysis is carried out; the right-hand side is
/// the original two-dimensional system with input J(t).
inline CatalogEntry catalog_reservoir2(const CatalogParams& p) {
    const double beta = p.beta, delta = p.delta, phase = p.phase, gain = p.gain;
    const std::size_t m = std::max<std::size_t>(p.delay_count, 1);
    auto input = p.input ? p.input : [](double) { return 0.0; };
    SystemSpec sys(2, m, p.delay_bound,
                   [beta, delta, phase, gain, m, input](double t, const std::vector<double>& x,
                                                        const std::vector<std::vector<double>>& y) {
                       double drive = 0.0;
                       for (std::size_t i = 0; i < m; ++i) {
                           const double s = std::sin(y[i][0] + phase + gain * input(t));
                           drive += s * s;
                       }
                       return std::vector<double>{-x[0] - delta * x[1] +
                                                      beta / static_cast<double>(m) * drive,
                                                  x[0]};
                   });
    sys.set_name("reservoir2");

    if (delta >= 0.25) throw std::invalid_argument("reservoir2: delta must be < 1/4");
    const double bd = std::sqrt(1.0 - 4.0 * delta);
    BoundMatrices bounds;
    bounds.m0 = RMatrix{{0.5 * (-1.0 - bd), 0.0}, {0.0, 0.5 * (-1.0 + bd)}};
    const double c = beta / (2.0 * static_cast<double>(m) * bd);
    const RMatrix mi{{c * (1.0 + bd), c * (1.0 - bd)}, {c * (1.0 + bd), c * (1.0 - bd)}};
    bounds.mi.assign(m, mi);
    return {sys, bounds};
}

inline CatalogEntry catalog(const std::string& name, const CatalogParams& p = {}) {
    if (name == "nis-example") return catalog_nis_example(p);
    if (name == "is-example") return catalog_is_example(p);
    if (name == "reservoir1") return catalog_reservoir1(p);
    if (name == "reservoir2") return catalog_reservoir2(p);
    throw std::invalid_argument("unknown catalog system: " + name);
}

inline std::vector<std::string> catalog_names() {
    return {"nis-example", "is-example", "reservoir1", "reservoir2"};
}

}  // namespace delaygauge
