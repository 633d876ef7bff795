// Acceptance gate: twelve end-to-end checks, one pass/fail line each.
// Exit code is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <string>
#include <vector>

#include "delaygauge/catalog.hpp"
#include "delaygauge/comparison.hpp"
#include "delaygauge/discretize.hpp"
#include "delaygauge/integrator.hpp"
#include "delaygauge/reduction.hpp"
#include "delaygauge/reservoir.hpp"
#include "delaygauge/stability.hpp"

using namespace delaygauge;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s (%s)\n", n, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++failures;
}

void guarded(int n, bool (*fn)(std::string&)) {
    std::string detail;
    bool pass = false;
    try {
        pass = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(n, pass, detail);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// 1. Exact stability matrices and abscissas of the two catalog examples.
bool crit1(std::string& detail) {
    const auto nis = stability_matrix(catalog("nis-example").bounds);
    bool entries = true;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            entries = entries && nis.stability_matrix(i, j) == 0.25;
    const bool nis_ok = entries && std::abs(nis.abscissa - 0.5) <= 1e-12 &&
                        !nis.intrinsically_stable;

    const auto is = stability_matrix(catalog("is-example").bounds);
    const bool is_entries = is.stability_matrix(0, 0) == -3.0 && is.stability_matrix(0, 1) == 1.0 &&
                            is.stability_matrix(1, 0) == 2.0 && is.stability_matrix(1, 1) == -1.0;
    const double alpha_ref = -2.0 + std::sqrt(3.0);
    const bool is_ok = is_entries && std::abs(is.abscissa - alpha_ref) <= 1e-10 &&
                       is.intrinsically_stable;

    detail = "abscissas " + fmt(nis.abscissa) + " and " + fmt(is.abscissa);
    return nis_ok && is_ok;
}

// 2. Qualitative trajectory behaviour of the two examples under several delays.
bool crit2(std::string& detail) {
    const auto nis = catalog("nis-example");
    const auto is = catalog("is-example");
    const auto phi = HistoryFunction::constant({1.0, -0.5}, 6.0);

    // Small history: the growing mode lies along (1, -1) and the sine
    // nonlinearity saturates once the state is order one.
    const auto small = HistoryFunction::constant({0.01, -0.005}, 6.0);
    const double phi_norm = norm1(small(0.0));
    const auto grown = integrate(nis.system, DelaySignal::mod(2.0), small, 40.0);
    double sup = 0.0;
    for (double t = 0.0; t <= 40.0; t += 0.05) sup = std::max(sup, norm1(grown.evaluate(t)));
    const bool grows = sup >= 10.0 * phi_norm;

    const auto settled = integrate(nis.system, DelaySignal::constant(1.0), phi, 40.0);
    const auto fit = decay_fit(settled, 5.0);
    const bool settles = fit.rate > 0.0;

    bool decays = true;
    double worst_end = 0.0;
    SinusoidSumDelay sd;
    SinusoidSumDelay::Component sc;
    sc.offset = 3.0;
    sc.terms = {{1.0, 4.0, 0.0}, {1.0, 3.14159265358979323846, 0.0},
                {1.0, std::sqrt(3.0), 1.5707963267948966}};
    sd.components.push_back(sc);
    for (const DelaySignal& h : {DelaySignal::constant(3.0), DelaySignal::mod(2.0),
                                 DelaySignal(sd)}) {
        const auto traj = integrate(is.system, h, phi, 40.0);
        const double end = norm1(traj.evaluate(40.0));
        worst_end = std::max(worst_end, end);
        decays = decays && end < 1e-2;
    }

    detail = "growth sup " + fmt(sup) + ", settle rate " + fmt(fit.rate) +
             ", worst stable endpoint " + fmt(worst_end);
    return grows && settles && decays;
}

// 3. Componentwise domination of flow differences by the linear comparison flow.
bool crit3(std::string& detail) {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> ud(0.1, 5.9);
    std::uniform_real_distribution<double> ut(5.0, 15.0);
    double worst = 0.0;
    int violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto e = catalog(trial % 2 ? "is-example" : "nis-example");
        const auto phi1 = HistoryFunction::constant({u(rng), u(rng)}, 6.0);
        const auto phi2 = HistoryFunction::constant({u(rng), u(rng)}, 6.0);
        DelaySignal h = DelaySignal::constant(ud(rng));
        if (trial % 3 == 1) h = DelaySignal::mod(2.0);
        if (trial % 3 == 2) {
            SinusoidSumDelay sd;
            SinusoidSumDelay::Component sc;
            sc.offset = 2.0;
            sc.terms = {{0.5, 1.3, 0.0}};
            sd.components.push_back(sc);
            h = DelaySignal(std::move(sd));
        }
        const auto rep = verify_comparison(e.system, e.bounds, phi1, phi2, h, ut(rng), 1e-6);
        worst = std::max(worst, rep.max_violation);
        if (!rep.pass) ++violations;
    }
    detail = "100 trials, " + std::to_string(violations) + " violations, worst margin breach " +
             fmt(worst);
    return violations == 0;
}

// 4. Positivity of the linear comparison flow from nonnegative histories.
bool crit4(std::string& detail) {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u01(0.0, 0.5);
    std::uniform_real_distribution<double> udiag(-1.0, 0.2);
    std::uniform_real_distribution<double> ud(0.1, 5.9);
    double worst = 0.0;
    int bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng() % 3;
        const std::size_t r = 1 + rng() % 2;
        BoundMatrices b;
        b.m0 = RMatrix(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) b.m0(i, j) = (i == j) ? udiag(rng) : u01(rng);
        for (std::size_t k = 0; k < r; ++k) {
            RMatrix m(d, d);
            for (auto& v : m.data()) v = u01(rng);
            b.mi.push_back(std::move(m));
        }
        std::vector<double> taus(r);
        for (auto& t : taus) t = ud(rng);
        std::vector<double> start(d);
        for (auto& v : start) v = u01(rng);
        const auto rep = check_positivity(b, DelaySignal::constant(taus),
                                          HistoryFunction::constant(start, 6.0), 10.0);
        worst = std::min(worst, rep.min_value);
        if (!rep.pass) ++bad;
    }
    detail = "100 trials, grid minimum " + fmt(worst);
    return bad == 0;
}

// 5. Isoradial reduction preserves the spectral radius; poles are reported.
bool crit5(std::string& detail) {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> u(0.05, 1.05);
    int bad = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng() % 6;
        RMatrix b(n, n);
        for (auto& v : b.data()) v = u(rng);
        const std::size_t keep = 1 + rng() % (n - 1);
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < keep; ++i) s.push_back(i);
        const auto res = isoradial_reduce(b, s);
        worst = std::max(worst, std::abs(res.rho_reduced - res.rho_original) /
                                    std::max(1.0, res.rho_original));
        if (!res.radius_preserved) ++bad;
    }
    int poles = 0;
    for (int trial = 0; trial < 5; ++trial) {
        RMatrix b(3, 3);
        b(0, 0) = 0.3;
        b(1, 1) = 1.0 + 0.5 * trial;
        b(1, 2) = 0.2;
        b(2, 1) = 0.2;
        b(2, 2) = 1.0 + 0.5 * trial;
        try {
            isoradial_reduce(b, {0});
        } catch (const reduction_pole_error&) {
            ++poles;
        }
    }
    detail = "200 trials, worst relative drift " + fmt(worst) + ", " + std::to_string(poles) +
             "/5 pole cases reported";
    return bad == 0 && poles == 5;
}

// 6. Fixed-point radius identity for nonnegative block companions.
bool crit6(std::string& detail) {
    std::mt19937 rng(44);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int disagree = 0, iff_bad = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng() % 3;
        const std::size_t n = 2 + rng() % 5;
        const double scale = 0.05 + u(rng);
        std::vector<RMatrix> blocks;
        for (std::size_t k = 0; k < n; ++k) {
            RMatrix a(d, d);
            for (auto& v : a.data()) v = scale * u(rng);
            blocks.push_back(std::move(a));
        }
        const auto r = companion_radius_identity(blocks);
        worst = std::max(worst, std::abs(r.rho_direct - r.rho_reduced));
        if (!r.agree) ++disagree;
        if (!r.iff_check) ++iff_bad;
    }
    detail = "100 tuples, worst |direct - reduced| " + fmt(worst) + ", iff failures " +
             std::to_string(iff_bad);
    return disagree == 0 && iff_bad == 0;
}

// 7. Semiconjugacy of the exact step with the companion action; lattice-kernel
//    histories stay zero on the lattice.
bool crit7(std::string& detail) {
    const auto b = catalog("is-example").bounds;
    LiTauDelay li;
    li.tau = 0.1;
    li.n_tau = 30;
    std::mt19937 rng(45);
    li.table = {std::vector<int>(50)};
    for (auto& n : li.table[0]) n = static_cast<int>(rng() % 31);
    std::vector<std::vector<double>> samples;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 64; ++k) samples.push_back({u(rng), u(rng)});
    const auto phi = HistoryFunction::sampled(samples, 3.0);
    const auto rep = verify_semiconjugacy(b, li, phi, 50);

    const double tau = 0.25;
    LiTauDelay li2;
    li2.tau = tau;
    li2.n_tau = 4;
    li2.table = {std::vector<int>(40, 3)};
    HistoryFunction bump(
        [tau](double s) {
            const double v = std::sin(3.14159265358979323846 * s / tau);
            return std::vector<double>{v, -0.5 * v};
        },
        1.0, 2);
    const auto traj = integrate(b, DelaySignal(li2), bump, 2.0, 1e-3);
    double lattice_sup = 0.0;
    for (int k = 4; k <= 8; ++k) lattice_sup = std::max(lattice_sup, norm1(traj.evaluate(k * tau)));

    detail = "50-step discrepancy " + fmt(rep.max_discrepancy) + ", kernel lattice sup " +
             fmt(lattice_sup);
    return rep.pass && rep.max_discrepancy <= 1e-10 && lattice_sup <= 1e-10;
}

// 8. Supremum-radius trend of the discretized families at t0 = 1.
bool crit8(std::string& detail) {
    const auto b = catalog("is-example").bounds;
    const auto rows = jsr_trend(b, 1.0, {4, 8, 16});
    bool below_one = true, exact = true;
    double min_beta = 1e300;
    std::string table = "table";
    for (const auto& r : rows) {
        below_one = below_one && r.sup_rho < 1.0;
        exact = exact && r.exact;
        min_beta = std::min(min_beta, r.beta_hat);
        table += " [n=" + std::to_string(r.n) + " sup_rho=" + fmt(r.sup_rho) + " beta_hat=" +
                 fmt(r.beta_hat) + "]";
    }
    detail = table;
    return below_one && exact && min_beta > 0.0;
}

// 9. Scaled error of rho(I + A/n) vs 1 + alpha/n shrinks along n.
bool crit9(std::string& detail) {
    const auto c = asymptotic_radius_check(RMatrix{{-3.0, 1.0}, {2.0, -1.0}},
                                           {100, 1000, 10000});
    detail = "errors";
    for (const auto& r : c.rows) detail += " " + fmt(r.error);
    detail += c.decreasing ? ", decreasing" : ", not decreasing";
    return c.decreasing;
}

// 10. Closed-form abscissa and consistency of the sin^2 reservoir at the
//     reference parameters under a shared chaotic input.
bool crit10(std::string& detail) {
    const auto analysis = reservoir2_analysis(1.0 / 3.0, 1.0 / 8.0);
    const double direct = stability_matrix(catalog("reservoir2").bounds).abscissa;
    const bool alpha_ok = std::abs(analysis.abscissa - (-0.0139)) <= 1e-3 &&
                          std::abs(direct - analysis.abscissa) <= 1e-10 && analysis.region_ok;

    // Moderate history amplitude: the per-trajectory transient along the slow
    // mode decays at rate 0.146, so order-one histories still dominate the
    // signal variance inside the correlation window.
    const auto j = lorenz_input(35.0, 1e-3);
    Reservoir2Config cfg;
    double min_gamma = 1e300;
    for (unsigned seed = 1; seed <= 5; ++seed) {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> u(-0.25, 0.25);
        const auto p1 = HistoryFunction::constant({u(rng), u(rng)}, 6.0);
        const auto p2 = HistoryFunction::constant({u(rng), u(rng)}, 6.0);
        const auto x = simulate_reservoir2(cfg, j, p1, 35.0);
        const auto y = simulate_reservoir2(cfg, j, p2, 35.0);
        min_gamma = std::min(min_gamma, consistency_correlation(x, y, 30.0, 5.0));
    }
    detail = "abscissa " + fmt(analysis.abscissa) + ", min gamma^2 " + fmt(min_gamma);
    return alpha_ok && min_gamma >= 0.99;
}

// 11. tanh reservoir: closed-form abscissa and input-driven convergence under
//     constant and periodic delays.
bool crit11(std::string& detail) {
    const RMatrix a{{0.0, 1.0}, {1.0, 0.0}};
    const RMatrix w{{1.0}, {0.5}};
    const double alpha = reservoir1_analysis(1.0, 0.9, a);
    const bool alpha_ok = std::abs(alpha + 0.1) <= 1e-12;

    const auto u = lorenz_input(40.0, 1e-2);
    const auto phi1 = random_history(2, 6.0, 61);
    const auto phi2 = random_history(2, 6.0, 62);
    double gap0 = 0.0;
    for (std::size_t i = 0; i < 2; ++i) gap0 += std::abs(phi1(0.0)[i] - phi2(0.0)[i]);

    double worst_ratio = 0.0;
    for (const DelaySignal& h : {DelaySignal::constant(1.0), DelaySignal::mod(2.0)}) {
        const auto x = simulate_reservoir1(1.0, 0.9, a, w, 0.5, h, u, phi1, 40.0, 6.0, 1e-2);
        const auto y = simulate_reservoir1(1.0, 0.9, a, w, 0.5, h, u, phi2, 40.0, 6.0, 1e-2);
        const auto xe = x.evaluate(40.0);
        const auto ye = y.evaluate(40.0);
        const double gap = std::abs(xe[0] - ye[0]) + std::abs(xe[1] - ye[1]);
        worst_ratio = std::max(worst_ratio, gap / gap0);
    }
    detail = "abscissa " + fmt(alpha) + ", worst terminal/initial gap ratio " + fmt(worst_ratio);
    return alpha_ok && worst_ratio < 1e-3;
}

// 12. Refinement study of the integrator against the hand method-of-steps
//     solution of x' = -x(t-1), phi = 1 on [0, 2].
bool crit12(std::string& detail) {
    BoundMatrices b;
    b.m0 = RMatrix{{0.0}};
    b.mi = {RMatrix{{-1.0}}};
    auto hand = [](double t) {
        if (t <= 1.0) return 1.0 - t;
        return 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0);
    };
    std::vector<double> errs;
    for (double step : {0.2, 0.1, 0.05, 0.025}) {
        const auto traj = integrate(b, DelaySignal::constant(1.0),
                                    HistoryFunction::constant({1.0}, 2.0), 2.0, step);
        double e = 0.0;
        for (double t = 0.0; t <= 2.0; t += 0.125)
            e = std::max(e, std::abs(traj.evaluate(t)[0] - hand(t)));
        errs.push_back(e);
    }
    bool order_ok = true;
    bool roundoff = true;
    for (std::size_t k = 0; k < errs.size(); ++k) {
        if (errs[k] > 1e-13) roundoff = false;
        if (k > 0 && errs[k] > errs[k - 1] / 8.0) order_ok = false;
    }
    detail = "errors";
    for (double e : errs) detail += " " + fmt(e);
    if (roundoff) detail += "; at roundoff for every step (piecewise-polynomial solution)";
    return order_ok || roundoff;
}

}  // namespace

int main() {
    guarded(1, crit1);
    guarded(2, crit2);
    guarded(3, crit3);
    guarded(4, crit4);
    guarded(5, crit5);
    guarded(6, crit6);
    guarded(7, crit7);
    guarded(8, crit8);
    guarded(9, crit9);
    guarded(10, crit10);
    guarded(11, crit11);
    guarded(12, crit12);
    std::printf("%d/12 criteria passed\n", 12 - failures);
    return failures;
}
