#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "delaygauge/catalog.hpp"
#include "delaygauge/discretize.hpp"
#include "delaygauge/integrator.hpp"

using namespace delaygauge;

namespace {

SystemSpec scalar_delayed_negation(double big_t = 1.0) {
    return SystemSpec(1, 1, big_t,
                      [](double, const std::vector<double>&,
                         const std::vector<std::vector<double>>& y) {
                          return std::vector<double>{-y[0][0]};
                      });
}

double sup_norm1(const Trajectory& traj, double t0, double t1, std::size_t grid = 2048) {
    double best = 0.0;
    for (std::size_t k = 0; k <= grid; ++k) {
        const double t = t0 + (t1 - t0) * static_cast<double>(k) / grid;
        best = std::max(best, norm1(traj.evaluate(t)));
    }
    return best;
}

}  // namespace

TEST_CASE("plain ODE sanity") {
    SystemSpec sys(1, 0, 1.0,
                   [](double, const std::vector<double>& x,
                      const std::vector<std::vector<double>>&) {
                       return std::vector<double>{-x[0]};
                   });
    const auto traj =
        integrate(sys, DelaySignal::constant(std::vector<double>{}),
                  HistoryFunction::constant({1.0}, 1.0), 1.0, 1e-3);
    CHECK(traj.evaluate(1.0)[0] == Catch::Approx(std::exp(-1.0)).margin(1e-8));
}

TEST_CASE("hand method-of-steps solution of x' = -x(t-1)") {
    const auto traj = integrate(scalar_delayed_negation(), DelaySignal::constant(1.0),
                                HistoryFunction::constant({1.0}, 1.0), 2.0, 1e-3);
    for (double t : {0.1, 0.5, 0.99}) CHECK(traj.evaluate(t)[0] == Catch::Approx(1.0 - t).margin(1e-10));
    // on [1,2]: x(t) = 1 - t + (t-1)^2/2
    for (double t : {1.25, 1.7, 2.0})
        CHECK(traj.evaluate(t)[0] ==
              Catch::Approx(1.0 - t + 0.5 * (t - 1.0) * (t - 1.0)).margin(1e-8));
    CHECK(traj.evaluate(2.0)[0] == Catch::Approx(-0.5).margin(1e-8));
}

TEST_CASE("stable example decays under a long constant delay") {
    const auto e = catalog("is-example");
    const auto traj = integrate(e.system, DelaySignal::constant(3.0),
                                HistoryFunction::constant({1.0, 1.0}, 6.0), 40.0);
    CHECK(norm1(traj.evaluate(40.0)) < 1e-2);
}

TEST_CASE("history underrun and divergence reporting") {
    SECTION("delay exceeding the bound") {
        CHECK_THROWS_AS(integrate(scalar_delayed_negation(1.0), DelaySignal::constant(2.0),
                                  HistoryFunction::constant({1.0}, 1.0), 2.0),
                        delay_bound_error);
    }
    SECTION("divergence") {
        SystemSpec sys(1, 1, 1.0,
                       [](double, const std::vector<double>& x,
                          const std::vector<std::vector<double>>&) {
                           return std::vector<double>{x[0] * x[0] * x[0]};
                       });
        CHECK_THROWS_AS(integrate(sys, DelaySignal::constant(0.5),
                                  HistoryFunction::constant({3.0}, 1.0), 10.0, 1e-2),
                        divergence_error);
    }
}

TEST_CASE("exact tau-step of the linear system") {
    BoundMatrices b;
    b.m0 = RMatrix{{-1.0}};
    b.mi = {RMatrix{{0.5}}};
    LiTauDelay li;
    li.tau = 0.1;
    li.n_tau = 3;
    li.table = {std::vector<int>(30, 3)};

    SECTION("closed-form first step") {
        const std::vector<double> grid(4, 1.0);  // phi identically 1
        const auto seq = exact_step_linear(b, li, grid, 1);
        const double expect = std::exp(-0.1) + (1.0 - std::exp(-0.1)) * 0.5;
        CHECK(seq[1][0] == Catch::Approx(expect).margin(1e-14));
        CHECK(seq[1][1] == 1.0);  // shifted lattice history
    }
    SECTION("no delay coupling gives pure exponential decay") {
        BoundMatrices b0 = b;
        b0.mi = {RMatrix{{0.0}}};
        const std::vector<double> grid(4, 1.0);
        const auto seq = exact_step_linear(b0, li, grid, 2);
        CHECK(seq[2][0] == Catch::Approx(std::exp(-0.2)).margin(1e-14));
    }
    SECTION("matches RK4 at fine step on the stable example bounds") {
        const auto bounds = catalog("is-example").bounds;
        LiTauDelay li2;
        li2.tau = 0.1;
        li2.n_tau = 5;
        li2.table = {std::vector<int>(10, 4)};
        const auto phi = HistoryFunction::constant({0.7, -0.4}, 0.5);
        auto grid = evaluation_map(phi, li2.tau, li2.n_tau);
        const auto exact = exact_step_linear(bounds, li2, grid, 1);
        const auto traj = integrate(bounds, DelaySignal(li2), phi, 0.1, 1e-4);
        const auto x = traj.evaluate(0.1);
        CHECK(std::abs(x[0] - exact[1][0]) <= 1e-9);
        CHECK(std::abs(x[1] - exact[1][1]) <= 1e-9);
    }
    SECTION("singular M0 rejected") {
        BoundMatrices bs;
        bs.m0 = RMatrix{{0.0}};
        bs.mi = {RMatrix{{0.5}}};
        CHECK_THROWS_AS(exact_step_linear(bs, li, std::vector<double>(4, 1.0), 1),
                        singular_matrix_error);
    }
}

TEST_CASE("window extraction and the cocycle property") {
    const auto e = catalog("is-example");
    const auto phi = HistoryFunction::constant({1.0, -0.5}, 6.0);
    const auto h = DelaySignal::constant(2.0);

    SECTION("window at the start reproduces the history") {
        const auto traj = integrate(e.system, h, phi, 1.0);
        const auto w = window(traj, 0.0);
        for (double s : {-5.9, -3.0, -0.1, 0.0}) {
            const auto a = w(s);
            const auto bb = phi(s);
            CHECK(std::abs(a[0] - bb[0]) <= 1e-9);
            CHECK(std::abs(a[1] - bb[1]) <= 1e-9);
        }
    }
    SECTION("cocycle: restart from a window matches the longer run") {
        const double t1 = 4.0, t2 = 3.0;
        const auto long_run = integrate(e.system, h, phi, t1 + t2);
        const auto first = integrate(e.system, h, phi, t1);
        // autonomous system with constant delay: restarting is exact
        const auto second = integrate(e.system, h, window(first, t1), t2);
        for (double s : {0.5, 1.5, 2.9}) {
            const auto a = second.evaluate(s);
            const auto bb = long_run.evaluate(t1 + s);
            CHECK(std::abs(a[0] - bb[0]) + std::abs(a[1] - bb[1]) <= 1e-6);
        }
    }
    SECTION("zero history stays zero") {
        const auto traj = integrate(e.system, h, HistoryFunction::constant({0.0, 0.0}, 6.0), 5.0);
        const auto w = window(traj, 5.0);
        CHECK(w.c0_norm() <= 1e-12);
    }
    SECTION("window outside the span rejected") {
        const auto traj = integrate(e.system, h, phi, 1.0);
        CHECK_THROWS_AS(window(traj, 2.0), std::domain_error);
    }
}

TEST_CASE("positivity of the linear comparison flow") {
    const auto bounds = catalog("is-example").bounds;
    SECTION("zero history") {
        const auto rep = check_positivity(bounds, DelaySignal::mod(2.0),
                                          HistoryFunction::constant({0.0, 0.0}, 6.0), 5.0);
        CHECK(rep.pass);
        CHECK(rep.min_value == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("reference nonnegative history under the mod delay") {
        const auto rep = check_positivity(bounds, DelaySignal::mod(2.0),
                                          HistoryFunction::constant({1.0, 1.0}, 6.0), 30.0);
        CHECK(rep.pass);
    }
    SECTION("random nonnegative histories") {
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> u(0.0, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            const auto phi = HistoryFunction::constant({u(rng), u(rng)}, 6.0);
            const auto h = DelaySignal::constant({u(rng)});
            CHECK(check_positivity(bounds, h, phi, 8.0).pass);
        }
    }
}

TEST_CASE("exponential decay fitting") {
    SECTION("synthetic exponential") {
        SystemSpec sys(2, 0, 0.5,
                       [](double, const std::vector<double>& x,
                          const std::vector<std::vector<double>>&) {
                           return std::vector<double>{-2.0 * x[0], -2.0 * x[1]};
                       });
        const auto traj = integrate(sys, DelaySignal::constant(std::vector<double>{}),
                                    HistoryFunction::constant({1.0, 1.0}, 0.5), 10.0, 1e-3);
        const auto fit = decay_fit(traj, 1.0);
        CHECK(fit.rate == Catch::Approx(2.0).margin(1e-3));
    }
    SECTION("stable example decays, unstable example grows") {
        const auto is = catalog("is-example");
        const auto t1 = integrate(is.system, DelaySignal::constant(1.0),
                                  HistoryFunction::constant({1.0, 1.0}, 6.0), 40.0);
        CHECK(decay_fit(t1, 5.0).rate > 0.0);

        // Small history: the growing mode lies along (1, -1) and the sine
        // nonlinearity saturates once the state is order one.
        const auto nis = catalog("nis-example");
        const auto t2 = integrate(nis.system, DelaySignal::mod(2.0),
                                  HistoryFunction::constant({0.01, -0.005}, 6.0), 40.0);
        CHECK(decay_fit(t2, 5.0).rate < 0.0);
    }
    SECTION("short trajectory rejected") {
        const auto e = catalog("is-example");
        const auto traj = integrate(e.system, DelaySignal::constant(1.0),
                                    HistoryFunction::constant({1.0, 1.0}, 6.0), 10.0);
        CHECK_THROWS_AS(decay_fit(traj, 5.0), std::invalid_argument);
    }
}

TEST_CASE("difference of solutions obeys the Lipschitz growth bound") {
    const auto e = catalog("nis-example");
    const double l0 = e.system.lipschitz_constant().value();
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p1 = HistoryFunction::constant({u(rng), u(rng)}, 6.0);
        const auto p2 = HistoryFunction::constant({u(rng), u(rng)}, 6.0);
        const double t_end = 5.0;
        const auto x1 = integrate(e.system, DelaySignal::constant(1.0), p1, t_end);
        const auto x2 = integrate(e.system, DelaySignal::constant(1.0), p2, t_end);
        double gap0 = 0.0;
        for (std::size_t i = 0; i < 2; ++i) gap0 += std::abs(p1(0.0)[i] - p2(0.0)[i]);
        const double bound = std::exp(l0 * 2.0 * t_end) * std::max(gap0, 1e-12);
        for (double t : {1.0, 2.5, 5.0}) {
            const auto a = x1.evaluate(t);
            const auto bb = x2.evaluate(t);
            CHECK(std::abs(a[0] - bb[0]) + std::abs(a[1] - bb[1]) <= bound);
        }
    }
}

TEST_CASE("response shrinks with the delay perturbation") {
    const auto e = catalog("is-example");
    const auto phi = HistoryFunction::constant({1.0, 1.0}, 6.0);
    const auto base = integrate(e.system, DelaySignal::constant(2.0), phi, 10.0);
    double prev = -1.0;
    for (double eps : {0.4, 0.2, 0.1}) {
        const auto pert = integrate(e.system, DelaySignal::constant(2.0 + eps), phi, 10.0);
        double diff = 0.0;
        for (std::size_t k = 0; k <= 256; ++k) {
            const double t = 10.0 * static_cast<double>(k) / 256;
            const auto a = base.evaluate(t);
            const auto bb = pert.evaluate(t);
            diff = std::max(diff, std::abs(a[0] - bb[0]) + std::abs(a[1] - bb[1]));
        }
        if (prev >= 0.0) CHECK(diff <= prev * 4.0 / 2.0 + 1e-12);  // halving within factor 4
        prev = diff;
    }
}

TEST_CASE("unstable example grows under the mod delay") {
    const auto e = catalog("nis-example");
    const auto phi = HistoryFunction::constant({0.01, -0.005}, 6.0);
    const auto traj = integrate(e.system, DelaySignal::mod(2.0), phi, 40.0);
    CHECK(sup_norm1(traj, 0.0, 40.0) >= 10.0 * phi.c0_norm());
}
