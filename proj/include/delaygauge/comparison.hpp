#pragma once

// Numerical check of the comparison principle: the linear system R dominates
// differences of nonlinear solutions componentwise,
// |S[phi1] - S[phi2]| <= R[|phi1 - phi2|].

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "delaygauge/integrator.hpp"

namespace delaygauge {

struct ComparisonReport {
    bool pass = false;
    double max_violation = 0.0;  // max over the grid of |x1-x2| - r, componentwise
    double arg_t = 0.0;
    std::size_t arg_component = 0;
    double tol = 0.0;
};

/// Integrates the nonlinear system twice and the linear comparison system
/// once (initial condition |phi1 - phi2| taken pointwise) and checks
/// componentwise domination on a dense grid over [0, t_end].
inline ComparisonReport verify_comparison(const SystemSpec& sys, const BoundMatrices& b,
                                          const HistoryFunction& phi1, const HistoryFunction& phi2,
                                          const DelaySignal& h, double t_end, double tol = 1e-6,
                                          double step = 1e-3) {
    if (phi1.dim() != sys.dim() || phi2.dim() != sys.dim() || b.dim() != sys.dim())
        throw std::invalid_argument("verify_comparison: dimension mismatch");
    if (tol < 10.0 * step * step * step * step && tol < 1e-12)
        throw std::invalid_argument("verify_comparison: tol below the integrator noise floor");

    const double big_t = sys.delay_bound();
    const std::size_t d = sys.dim();

    HistoryFunction diff(
        [phi1, phi2, d](double s) {
            auto a = phi1(s);
            const auto bb = phi2(s);
            for (std::size_t i = 0; i < d; ++i) a[i] = std::abs(a[i] - bb[i]);
            return a;
        },
        big_t, d);

    const auto x1 = integrate(sys, h, phi1, t_end, step);
    const auto x2 = integrate(sys, h, phi2, t_end, step);
    const auto rr = integrate(b, h, diff, t_end, step);

    ComparisonReport rep;
    rep.tol = tol;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    const std::size_t grid = 2048;
    for (std::size_t k = 0; k <= grid; ++k) {
        const double t = t_end * static_cast<double>(k) / grid;
        const auto a = x1.evaluate(t);
        const auto bb = x2.evaluate(t);
        const auto r = rr.evaluate(t);
        for (std::size_t i = 0; i < d; ++i) {
            const double v = std::abs(a[i] - bb[i]) - r[i];
            if (v > rep.max_violation) {
                rep.max_violation = v;
                rep.arg_t = t;
                rep.arg_component = i;
            }
        }
    }
    rep.pass = rep.max_violation <= tol;
    return rep;
}

}  // namespace delaygauge
