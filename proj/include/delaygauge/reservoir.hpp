#pragma once

// Delayed reservoirs: input-signal generation (Lorenz x-component and
// synthetic signals), the two reservoir simulators, the consistency
// correlation gamma^2, and the (beta, delta) consistency sweep.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaygauge/catalog.hpp"
#include "delaygauge/integrator.hpp"
#include "delaygauge/stability.hpp"

namespace delaygauge {

class degenerate_signal_error : public std::runtime_error {
public:
    explicit degenerate_signal_error(std::size_t component, double sigma)
        : std::runtime_error("signal component " + std::to_string(component) +
                             " has near-zero deviation " + std::to_string(sigma)) {}
};

/// A sampled scalar driving signal on [0, t_end] with cubic interpolation.
class InputSignal {
public:
    InputSignal() = default;

    InputSignal(std::vector<double> samples, double dt, std::string source)
        : dt_(dt), source_(std::move(source)) {
        if (samples.size() < 2) throw std::invalid_argument("InputSignal: need >= 2 samples");
        if (dt <= 0) throw std::invalid_argument("InputSignal: dt must be positive");
        for (double v : samples)
            if (!std::isfinite(v)) throw std::invalid_argument("InputSignal: non-finite sample");
        data_ = std::make_shared<std::vector<double>>(std::move(samples));
    }

    double t_end() const noexcept {
        return data_ ? dt_ * static_cast<double>(data_->size() - 1) : 0.0;
    }
    const std::string& source() const noexcept { return source_; }
    const std::vector<double>& samples() const { return *data_; }
    double dt() const noexcept { return dt_; }
    bool valid() const noexcept { return static_cast<bool>(data_); }

    double operator()(double t) const {
        const auto& s = *data_;
        const std::size_t n = s.size();
        double u = t / dt_;
        u = std::min(std::max(u, 0.0), static_cast<double>(n - 1));
        const std::size_t k = std::min(static_cast<std::size_t>(u), n - 2);
        const double w = u - static_cast<double>(k);
        const double y0 = s[k], y1 = s[k + 1];
        const double m0 = (k > 0) ? 0.5 * (y1 - s[k - 1]) : y1 - y0;
        const double m1 = (k + 2 < n) ? 0.5 * (s[k + 2] - y0) : y1 - y0;
        return hermite_cubic(y0, m0, y1, m1, w);
    }

    std::function<double(double)> as_function() const {
        auto copy = *this;
        return [copy](double t) { return copy(t); };
    }

private:
    std::shared_ptr<std::vector<double>> data_;
    double dt_ = 0.0;
    std::string source_;
};

/// One chosen component of an RK4-integrated Lorenz trajectory from a fixed
/// seed state; deterministic and reproducible.
inline InputSignal lorenz_input(double t_end, double dt = 1e-3, double sigma = 10.0,
                                double rho = 28.0, double beta = 8.0 / 3.0, char component = 'x',
                                std::vector<double> seed = {1.0, 1.0, 1.0}) {
    if (dt > 1e-2) throw std::invalid_argument("lorenz_input: dt must be <= 1e-2");
    if (t_end <= 0) throw std::invalid_argument("lorenz_input: t_end must be positive");
    if (seed.size() != 3) throw std::invalid_argument("lorenz_input: seed must be 3-dimensional");
    std::size_t idx;
    switch (component) {
        case 'x': idx = 0; break;
        case 'y': idx = 1; break;
        case 'z': idx = 2; break;
        default: throw std::invalid_argument("lorenz_input: component must be x, y or z");
    }

    auto f = [sigma, rho, beta](const std::vector<double>& v) {
        return std::vector<double>{sigma * (v[1] - v[0]), v[0] * (rho - v[2]) - v[1],
                                   v[0] * v[1] - beta * v[2]};
    };
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt));
    std::vector<double> out;
    out.reserve(n + 1);
    std::vector<double> v = std::move(seed);
    out.push_back(v[idx]);
    for (std::size_t step = 0; step < n; ++step) {
        const auto k1 = f(v);
        std::vector<double> w(3);
        for (int i = 0; i < 3; ++i) w[i] = v[i] + 0.5 * dt * k1[i];
        const auto k2 = f(w);
        for (int i = 0; i < 3; ++i) w[i] = v[i] + 0.5 * dt * k2[i];
        const auto k3 = f(w);
        for (int i = 0; i < 3; ++i) w[i] = v[i] + dt * k3[i];
        const auto k4 = f(w);
        for (int i = 0; i < 3; ++i) v[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        out.push_back(v[idx]);
    }
    return InputSignal(std::move(out), dt, std::string("lorenz-") + component);
}

struct Reservoir2Config {
    double beta = 1.0 / 3.0;
    double delta = 1.0 / 8.0;
    double phase = 1.0;
    double gain = 7.0;
    std::vector<double> delays = {0.4, 0.7, 1.0};  // constant taus
    double delay_bound = 6.0;

    std::size_t delay_count() const noexcept { return delays.size(); }
};

/// x1' = -x1 - delta*x2 + beta/M sum sin^2(x1(t - tau_i) + phase + gain*J(t)),
/// x2' = x1.
inline Trajectory simulate_reservoir2(const Reservoir2Config& cfg, const InputSignal& j,
                                      const HistoryFunction& phi, double t_end,
                                      double step = 0.0) {
    if (j.valid() && j.t_end() < t_end - 1e-9)
        throw std::invalid_argument("simulate_reservoir2: input does not cover [0, t_end]");
    CatalogParams p;
    p.beta = cfg.beta;
    p.delta = cfg.delta;
    p.phase = cfg.phase;
    p.gain = cfg.gain;
    p.delay_count = cfg.delay_count();
    p.delay_bound = cfg.delay_bound;
    if (j.valid()) p.input = j.as_function();
    const auto entry = catalog_reservoir2(p);
    return integrate(entry.system, DelaySignal::constant(cfg.delays), phi, t_end, step);
}

/// x' = -g(x + tanh(rho*A*x(t - h) + sigma_in*W*u(t))), n-dimensional.
inline Trajectory simulate_reservoir1(double g, double rho, const RMatrix& a, const RMatrix& w,
                                      double sigma_in, const DelaySignal& h, const InputSignal& u,
                                      const HistoryFunction& phi, double t_end,
                                      double delay_bound = 6.0, double step = 0.0) {
    const double ra = spectrum(a).radius;
    if (std::abs(ra - 1.0) > 1e-8)
        throw std::invalid_argument("simulate_reservoir1: A must have spectral radius 1");
    const std::size_t n = a.rows();
    if (w.rows() != n) throw std::invalid_argument("simulate_reservoir1: W row count mismatch");
    {
        // Injectivity of W: the Gram matrix W^T W must be nonsingular.
        RMatrix gram(w.cols(), w.cols());
        for (std::size_t i = 0; i < w.cols(); ++i)
            for (std::size_t j = 0; j < w.cols(); ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += w(k, i) * w(k, j);
                gram(i, j) = s;
            }
        RMatrix eye(w.cols(), w.cols());
        for (std::size_t i = 0; i < w.cols(); ++i) eye(i, i) = 1.0;
        try {
            solve_linear(gram, eye);
        } catch (const singular_matrix_error&) {
            throw std::invalid_argument("simulate_reservoir1: W must have full column rank");
        }
    }

    auto input = u.valid() ? u.as_function() : [](double) { return 0.0; };
    SystemSpec sys(n, 1, delay_bound,
                   [g, rho, sigma_in, a, w, input, n](double t, const std::vector<double>& x,
                                                      const std::vector<std::vector<double>>& y) {
                       auto drive = a.apply(y.at(0));
                       const double ut = input(t);
                       std::vector<double> out(n);
                       for (std::size_t i = 0; i < n; ++i) {
                           double win = 0.0;
                           for (std::size_t c = 0; c < w.cols(); ++c) win += w(i, c);
                           out[i] = -g * (x[i] + std::tanh(rho * drive[i] + sigma_in * win * ut));
                       }
                       return out;
                   });
    sys.set_name("reservoir1");
    return integrate(sys, h, phi, t_end, step);
}

/// Consistency correlation over [t_skip, t_skip + T]:
/// gamma^2 = (1/(nT)) sum_i integral (x_i - mean_x)(y_i - mean_y)/(sig_x sig_y) dt,
/// means and deviations computed on the same window by the trapezoid rule.
template <typename TrajX, typename TrajY>
double consistency_correlation(const TrajX& x, const TrajY& y, double big_t,
                               double t_skip = 5.0, std::size_t grid = 4096) {
    if (x.dim() != y.dim()) throw std::invalid_argument("consistency_correlation: dim mismatch");
    const double t1 = t_skip + big_t;
    if (x.end_time() < t1 - 1e-9 || y.end_time() < t1 - 1e-9)
        throw std::invalid_argument("consistency_correlation: trajectories too short");
    const std::size_t d = x.dim();
    const double dt = big_t / static_cast<double>(grid);

    std::vector<std::vector<double>> xs(grid + 1), ys(grid + 1);
    for (std::size_t k = 0; k <= grid; ++k) {
        const double t = t_skip + dt * static_cast<double>(k);
        xs[k] = x.evaluate(t);
        ys[k] = y.evaluate(t);
    }
    auto trap = [&](auto&& f) {
        double s = 0.0;
        for (std::size_t k = 0; k <= grid; ++k) {
            const double w = (k == 0 || k == grid) ? 0.5 : 1.0;
            s += w * f(k);
        }
        return s * dt;
    };

    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double mx = trap([&](std::size_t k) { return xs[k][i]; }) / big_t;
        const double my = trap([&](std::size_t k) { return ys[k][i]; }) / big_t;
        const double vx = trap([&](std::size_t k) {
            const double e = xs[k][i] - mx;
            return e * e;
        }) / big_t;
        const double vy = trap([&](std::size_t k) {
            const double e = ys[k][i] - my;
            return e * e;
        }) / big_t;
        const double sx = std::sqrt(vx), sy = std::sqrt(vy);
        if (sx < 1e-10) throw degenerate_signal_error(i, sx);
        if (sy < 1e-10) throw degenerate_signal_error(i, sy);
        total += trap([&](std::size_t k) { return (xs[k][i] - mx) * (ys[k][i] - my); }) /
                 (big_t * sx * sy);
    }
    return total / static_cast<double>(d);
}

/// Componentwise-uniform constant-in-s random history on [-T, 0].
inline HistoryFunction random_history(std::size_t dim, double horizon, unsigned seed,
                                      double amplitude = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    std::vector<double> v(dim);
    for (auto& x : v) x = u(rng);
    return HistoryFunction::constant(std::move(v), horizon);
}

struct SweepRow {
    double beta = 0.0;
    double delta = 0.0;
    double abscissa = 0.0;
    bool region_ok = false;
    double gamma_sq = 0.0;
};

/// One (beta, delta) point of the consistency sweep: closed-form abscissa and
/// the observed correlation of two random-history responses to a shared input.
inline SweepRow consistency_sweep_point(double beta, double delta, const InputSignal& j,
                                        double t_end, double t_skip = 5.0, unsigned seed = 1,
                                        const std::vector<double>& delays = {0.4, 0.7, 1.0},
                                        double step = 0.0) {
    Reservoir2Config cfg;
    cfg.beta = beta;
    cfg.delta = delta;
    cfg.delays = delays;
    const auto analysis = reservoir2_analysis(beta, delta);
    SweepRow row;
    row.beta = beta;
    row.delta = delta;
    row.abscissa = analysis.abscissa;
    row.region_ok = analysis.region_ok;
    // Moderate amplitude: each trajectory carries its own slowly decaying
    // transient, and order-one histories let it dominate the signal variance
    // inside the correlation window.
    const auto phi1 = random_history(2, cfg.delay_bound, seed, 0.25);
    const auto phi2 = random_history(2, cfg.delay_bound, seed + 1000003, 0.25);
    const auto x = simulate_reservoir2(cfg, j, phi1, t_end, step);
    const auto y = simulate_reservoir2(cfg, j, phi2, t_end, step);
    row.gamma_sq = consistency_correlation(x, y, t_end - t_skip, t_skip);
    return row;
}

}  // namespace delaygauge
