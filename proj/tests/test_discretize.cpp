#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "delaygauge/catalog.hpp"
#include "delaygauge/discretize.hpp"
#include "delaygauge/eigen.hpp"

using namespace delaygauge;

namespace {

double brute_sup_error(const DelaySignal& h, const LiTauDelay& li, double t_end,
                       std::size_t grid = 20000) {
    const DelaySignal hh(li);
    double sup = 0.0;
    for (std::size_t k = 0; k < grid; ++k) {
        const double t = t_end * (static_cast<double>(k) + 0.5) / grid;
        const auto a = h.evaluate(t);
        const auto b = hh.evaluate(t);
        for (std::size_t i = 0; i < a.size(); ++i) sup = std::max(sup, std::abs(a[i] - b[i]));
    }
    return sup;
}

}  // namespace

TEST_CASE("delay approximation by the floor construction") {
    SECTION("constant delay") {
        const auto approx = approximate_delay(DelaySignal::constant(0.35), 0.1, 1.0, 2.0);
        for (int n : approx.li.table[0]) CHECK(n == 3);
        const double sup = brute_sup_error(DelaySignal::constant(0.35), approx.li, 2.0);
        CHECK(sup == Catch::Approx(0.05).margin(1e-3));
        CHECK(sup <= approx.sup_error_bound + 1e-9);
    }
    SECTION("signals already on the lattice are reproduced exactly") {
        LiTauDelay li;
        li.tau = 0.25;
        li.n_tau = 8;
        li.table = {{3, 5, 1, 0, 7, 2, 4, 4}};
        const auto approx = approximate_delay(DelaySignal(li), 0.25, 2.0, 2.0);
        CHECK(approx.li.table[0] == li.table[0]);
    }
    SECTION("mod delay within one lattice cell of the original") {
        const auto approx = approximate_delay(DelaySignal::mod(2.0), 0.25, 2.0, 4.0);
        const double sup = brute_sup_error(DelaySignal::mod(2.0), approx.li, 4.0);
        CHECK(sup <= 0.25 + 1e-9);
        CHECK(sup <= approx.sup_error_bound + 1e-9);
    }
    SECTION("smooth signal: error bound holds on a 10x finer grid") {
        SinusoidSumDelay d;
        SinusoidSumDelay::Component c;
        c.offset = 2.0;
        c.terms = {{0.5, 1.7, 0.3}};
        d.components.push_back(c);
        const DelaySignal h(std::move(d));
        const auto approx = approximate_delay(h, 0.1, 3.0, 5.0);
        CHECK(brute_sup_error(h, approx.li, 5.0, 50000) <= approx.sup_error_bound + 1e-9);
    }
    SECTION("lattice misalignment rejected") {
        CHECK_THROWS_AS(approximate_delay(DelaySignal::mod(2.0), 0.3, 2.1, 4.0),
                        std::invalid_argument);
    }
}

TEST_CASE("block companion assembly") {
    BoundMatrices b;
    b.m0 = RMatrix{{-1.0}};
    b.mi = {RMatrix{{0.5}}};
    SECTION("scalar reference blocks") {
        const auto c = build_companion(b, 0.1, 3, {3});
        REQUIRE(c.size() == 4);
        CHECK(c.assembled(0, 0) == Catch::Approx(std::exp(-0.1)).margin(1e-14));
        CHECK(c.assembled(0, 1) == 0.0);
        CHECK(c.assembled(0, 2) == 0.0);
        CHECK(c.assembled(0, 3) == Catch::Approx((1.0 - std::exp(-0.1)) / 2.0).margin(1e-14));
        CHECK(c.assembled(1, 0) == 1.0);
        CHECK(c.assembled(2, 1) == 1.0);
        CHECK(c.assembled(3, 2) == 1.0);
        CHECK(c.assembled(3, 3) == 0.0);
    }
    SECTION("no delay blocks: shift plus exponential corner") {
        BoundMatrices b0 = b;
        b0.mi.clear();
        const auto c = build_companion(b0, 0.1, 3, {});
        CHECK(spectrum(c.assembled).radius == Catch::Approx(std::exp(-0.1)).margin(1e-12));
    }
    SECTION("coincident indices sum their blocks") {
        BoundMatrices b2;
        b2.m0 = RMatrix{{-1.0}};
        b2.mi = {RMatrix{{0.5}}, RMatrix{{0.25}}};
        const auto c = build_companion(b2, 0.1, 3, {2, 2});
        CHECK(c.top[2](0, 0) ==
              Catch::Approx((1.0 - std::exp(-0.1)) * 0.75).margin(1e-14));
        CHECK(c.top[1](0, 0) == 0.0);
    }
    SECTION("out-of-range index rejected") {
        CHECK_THROWS_AS(build_companion(b, 0.1, 3, {4}), std::invalid_argument);
    }
}

TEST_CASE("lattice evaluation map") {
    SECTION("constant history") {
        const auto phi = HistoryFunction::constant({2.0, -1.0}, 1.0);
        const auto v = evaluation_map(phi, 0.5, 2);
        REQUIRE(v.size() == 6);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(v[2 * k] == 2.0);
            CHECK(v[2 * k + 1] == -1.0);
        }
    }
    SECTION("linear history") {
        HistoryFunction phi([](double s) { return std::vector<double>{s}; }, 1.0, 1);
        const auto v = evaluation_map(phi, 0.5, 2);
        CHECK(v[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(v[1] == Catch::Approx(-0.5).margin(1e-15));
        CHECK(v[2] == Catch::Approx(-1.0).margin(1e-15));
    }
    SECTION("kernel bump maps to zero") {
        const double tau = 0.25;
        HistoryFunction phi(
            [tau](double s) { return std::vector<double>{std::sin(3.14159265358979323846 * s / tau)}; },
            1.0, 1);
        const auto v = evaluation_map(phi, tau, 4);
        for (double x : v) CHECK(std::abs(x) <= 1e-12);
    }
    SECTION("domain underrun rejected") {
        const auto phi = HistoryFunction::constant({1.0}, 1.0);
        CHECK_THROWS_AS(evaluation_map(phi, 0.5, 3), std::domain_error);
    }
}

TEST_CASE("semiconjugacy of the exact step and the companion action") {
    SECTION("scalar case over 20 steps") {
        BoundMatrices b;
        b.m0 = RMatrix{{-1.0}};
        b.mi = {RMatrix{{0.5}}};
        LiTauDelay li;
        li.tau = 0.1;
        li.n_tau = 3;
        li.table = {std::vector<int>(20, 3)};
        const auto phi = HistoryFunction::constant({1.0}, 0.3);
        const auto rep = verify_semiconjugacy(b, li, phi, 20);
        CHECK(rep.pass);
        CHECK(rep.max_discrepancy <= 1e-12);
    }
    SECTION("stable example bounds with a random lattice table") {
        const auto b = catalog("is-example").bounds;
        LiTauDelay li;
        li.tau = 0.1;
        li.n_tau = 30;
        std::mt19937 rng(17);
        li.table = {std::vector<int>(50)};
        for (auto& n : li.table[0]) n = static_cast<int>(rng() % 31);
        std::vector<std::vector<double>> samples;
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k = 0; k < 64; ++k) samples.push_back({u(rng), u(rng)});
        const auto phi = HistoryFunction::sampled(samples, 3.0);
        const auto rep = verify_semiconjugacy(b, li, phi, 50);
        CHECK(rep.pass);
    }
    SECTION("kernel histories evolve to zero under the true linear flow") {
        const auto b = catalog("is-example").bounds;
        const double tau = 0.25;
        LiTauDelay li;
        li.tau = tau;
        li.n_tau = 4;
        li.table = {std::vector<int>(40, 3)};
        HistoryFunction bump(
            [tau](double s) {
                const double v = std::sin(3.14159265358979323846 * s / tau);
                return std::vector<double>{v, -0.5 * v};
            },
            1.0, 2);
        const auto traj = integrate(b, DelaySignal(li), bump, 2.0, 1e-3);
        for (int k = 1; k <= 8; ++k) {
            const auto x = traj.evaluate(k * tau);
            CHECK(norm1(x) <= 1e-10);
        }
    }
}

TEST_CASE("companion spectral radii stay below one for the stable family") {
    const auto b = catalog("is-example").bounds;
    for (std::size_t idx : {std::size_t{0}, std::size_t{15}, std::size_t{30}}) {
        const auto c = build_companion(b, 0.1, 30, {idx});
        CHECK(spectrum(c.assembled).radius < 1.0);
    }
}

TEST_CASE("spectrum correspondence for short companion products") {
    const auto b = catalog("is-example").bounds;
    LiTauDelay li;
    li.tau = 0.2;
    li.n_tau = 5;
    li.table = {{1, 4, 2}};
    RMatrix product = RMatrix::identity((li.n_tau + 1) * 2);
    for (std::size_t s = 0; s < 3; ++s) {
        const auto c = build_companion(b, li, s);
        product = c.assembled * product;
    }
    const double rho_direct = spectrum(product).radius;

    // power iteration against exact-step composition on the grid space
    std::vector<double> v((li.n_tau + 1) * 2, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 3000; ++it) {
        const auto seq = exact_step_linear(b, li, v, 3);
        auto w = seq.back();
        double n = 0.0;
        for (double x : w) n += std::abs(x);
        lambda = n;
        for (auto& x : w) x /= n;
        v = std::move(w);
    }
    CHECK(std::abs(rho_direct - lambda) <= 1e-6 * std::max(1.0, rho_direct));
}
