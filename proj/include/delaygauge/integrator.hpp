#pragma once

// Method-of-steps RK4 integration of nonlinear and linear DDEs with dense
// cubic-Hermite output, breakpoint handling for delay discontinuities, the
// exact tau-stepper for LI_tau delays, window extraction (the flow maps), a
// positivity checker, and exponential decay fitting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaygauge/delay.hpp"
#include "delaygauge/history.hpp"
#include "delaygauge/interp.hpp"
#include "delaygauge/stability.hpp"
#include "delaygauge/system.hpp"

namespace delaygauge {

class history_underrun_error : public std::runtime_error {
public:
    history_underrun_error(std::size_t delay_index, double t)
        : std::runtime_error("delayed argument of delay " + std::to_string(delay_index) +
                             " at t=" + std::to_string(t) + " precedes the history window"),
          delay_index_(delay_index), t_(t) {}
    std::size_t delay_index() const noexcept { return delay_index_; }
    double t() const noexcept { return t_; }

private:
    std::size_t delay_index_;
    double t_;
};

class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(double t)
        : std::runtime_error("non-finite state at t=" + std::to_string(t) + " (divergence)"),
          t_(t) {}
    double blow_up_time() const noexcept { return t_; }

private:
    double t_;
};

class Trajectory {
public:
    struct Step {
        double t0, t1;
        std::vector<double> x0, x1;  // endpoint states
        std::vector<double> f0, f1;  // endpoint derivatives
    };

    Trajectory(HistoryFunction history, double start_time)
        : history_(std::move(history)), start_(start_time), end_(start_time) {}

    double start_time() const noexcept { return start_; }
    double end_time() const noexcept { return end_; }
    double horizon() const noexcept { return history_.horizon(); }
    std::size_t dim() const noexcept { return history_.dim(); }
    const std::vector<Step>& steps() const noexcept { return steps_; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

    void push_step(Step s) {
        end_ = s.t1;
        steps_.push_back(std::move(s));
    }
    void set_breakpoints(std::vector<double> b) { breakpoints_ = std::move(b); }

    /// Dense evaluation anywhere in [start - T, end].
    std::vector<double> evaluate(double t) const { return eval(t, /*extrapolate=*/false); }

    /// Evaluation that extrapolates the final Hermite piece slightly past the
    /// integrated front (used for delayed lookups inside an in-progress step).
    std::vector<double> evaluate_extrapolating(double t) const { return eval(t, true); }

private:
    std::vector<double> eval(double t, bool extrapolate) const {
        const double tol = 1e-9 * std::max(1.0, std::abs(end_));
        if (t <= start_ + 1e-15) {
            const double s = t - start_;
            if (s < -history_.horizon() - tol)
                throw std::domain_error("trajectory evaluated before the history window");
            return history_(std::min(std::max(s, -history_.horizon()), 0.0));
        }
        if (steps_.empty()) {
            if (extrapolate) return history_(0.0);
            throw std::domain_error("trajectory evaluated past the integrated front");
        }
        if (t > end_ + tol && !extrapolate)
            throw std::domain_error("trajectory evaluated past the integrated front");

        // Binary search for the step containing t.
        std::size_t lo = 0, hi = steps_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (steps_[mid].t1 < t) lo = mid + 1;
            else hi = mid;
        }
        const Step& s = steps_[lo];
        const double dt = s.t1 - s.t0;
        const double w = (t - s.t0) / dt;  // may exceed 1 when extrapolating
        std::vector<double> out(s.x0.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = hermite_cubic(s.x0[i], dt * s.f0[i], s.x1[i], dt * s.f1[i], w);
        return out;
    }

    HistoryFunction history_;
    double start_, end_;
    std::vector<Step> steps_;
    std::vector<double> breakpoints_;
};

namespace detail {

// Breakpoint seeding: t0, every declared delay-discontinuity point, and one
// generation of their images (solutions of t - h_i(t) = b on a scan lattice).
inline std::vector<double> seed_breakpoints(const DelaySignal& h, double t0, double t_end) {
    std::vector<double> pts{t0};
    auto declared = h.breakpoints(t0, t_end);
    pts.insert(pts.end(), declared.begin(), declared.end());

    std::vector<double> sources = pts;
    const std::size_t scan = 4096;
    const double dt = (t_end - t0) / static_cast<double>(scan);
    const std::size_t r = h.components();
    std::vector<std::vector<double>> lag(scan + 1);
    for (std::size_t k = 0; k <= scan; ++k) {
        const double t = t0 + dt * static_cast<double>(k);
        const auto hv = h.evaluate(std::min(t, t_end));
        lag[k].resize(r);
        for (std::size_t i = 0; i < r; ++i) lag[k][i] = t - hv[i];
    }
    for (double b : sources) {
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t k = 0; k < scan; ++k) {
                const double g0 = lag[k][i] - b, g1 = lag[k + 1][i] - b;
                if (g0 == 0.0) pts.push_back(t0 + dt * static_cast<double>(k));
                if (g0 * g1 < 0.0) {
                    // Bisection refine within the lattice cell.
                    double a = t0 + dt * static_cast<double>(k);
                    double c = a + dt;
                    for (int it = 0; it < 40; ++it) {
                        const double m = 0.5 * (a + c);
                        const double gm = m - h.evaluate(m)[i] - b;
                        if (gm == 0.0) { a = c = m; break; }
                        if ((gm < 0.0) == (g0 < 0.0)) a = m;
                        else c = m;
                    }
                    pts.push_back(0.5 * (a + c));
                }
            }
        }
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double p : pts) {
        if (p < t0 - 1e-12 || p > t_end + 1e-12) continue;
        if (out.empty() || p - out.back() > 1e-10) out.push_back(std::min(std::max(p, t0), t_end));
    }
    if (out.empty() || out.front() > t0 + 1e-12) out.insert(out.begin(), t0);
    if (out.back() < t_end - 1e-12) out.push_back(t_end);
    else out.back() = t_end;
    return out;
}

// Smallest strictly positive delay sample; caps the step so delayed lookups
// into the in-progress step stay rare.
inline double min_positive_delay(const DelaySignal& h, double t0, double t_end) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t samples = 1024;
    for (std::size_t k = 0; k <= samples; ++k) {
        const double t = t0 + (t_end - t0) * static_cast<double>(k) / samples;
        for (double v : h.evaluate(t))
            if (v > 1e-9) best = std::min(best, v);
    }
    return best;
}

}  // namespace detail

/// Classical RK4 method of steps. Steps never straddle a breakpoint; delayed
/// lookups use the dense Hermite output (extrapolating the previous piece if
/// the delayed argument lands inside the current step).
inline Trajectory integrate(const SystemSpec& sys, const DelaySignal& h,
                            const HistoryFunction& phi, double t_end, double step = 0.0) {
    if (t_end <= 0) throw std::invalid_argument("integrate: t_end must be positive");
    if (phi.dim() != sys.dim()) throw std::invalid_argument("integrate: history dimension mismatch");
    const double big_t = sys.delay_bound();
    if (step <= 0) step = 1e-3 * std::min(big_t, 1.0);

    const std::size_t r = sys.delay_count();
    Trajectory traj(phi, 0.0);

    double step_cap = step;
    if (r > 0) {
        const double mpd = detail::min_positive_delay(h, 0.0, t_end);
        if (std::isfinite(mpd)) step_cap = std::min(step, mpd / 2.0);
    }

    std::vector<double> brk = (r > 0) ? detail::seed_breakpoints(h, 0.0, t_end)
                                      : std::vector<double>{0.0, t_end};
    traj.set_breakpoints(brk);

    auto delayed_states = [&](double t) {
        std::vector<std::vector<double>> y(r);
        if (r == 0) return y;
        const auto hv = h.evaluate(t);
        for (std::size_t i = 0; i < r; ++i) {
            if (hv[i] < -1e-9 || hv[i] > big_t + 1e-9)
                throw delay_bound_error(i, t, hv[i], big_t);
            const double a = t - hv[i];
            if (a < -big_t - 1e-9) throw history_underrun_error(i, t);
            y[i] = traj.evaluate_extrapolating(a);
        }
        return y;
    };
    auto rhs = [&](double t, const std::vector<double>& x) { return sys.rhs(t, x, delayed_states(t)); };

    std::vector<double> x = phi(0.0);
    std::vector<double> fx = rhs(0.0, x);
    const std::size_t d = sys.dim();

    for (std::size_t seg = 0; seg + 1 < brk.size(); ++seg) {
        const double a = brk[seg], b = brk[seg + 1];
        const double len = b - a;
        const auto nsteps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step_cap)));
        const double hstep = len / static_cast<double>(nsteps);
        for (std::size_t k = 0; k < nsteps; ++k) {
            const double t = a + hstep * static_cast<double>(k);
            const double t1 = (k + 1 == nsteps) ? b : t + hstep;
            std::vector<double> k1 = fx;
            std::vector<double> xt(d);
            for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] + 0.5 * hstep * k1[i];
            std::vector<double> k2 = rhs(t + 0.5 * hstep, xt);
            for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] + 0.5 * hstep * k2[i];
            std::vector<double> k3 = rhs(t + 0.5 * hstep, xt);
            for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] + hstep * k3[i];
            std::vector<double> k4 = rhs(t1, xt);

            std::vector<double> xn(d);
            for (std::size_t i = 0; i < d; ++i)
                xn[i] = x[i] + hstep / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            for (double v : xn)
                if (!std::isfinite(v)) throw divergence_error(t1);

            // Endpoint derivative before the piece is committed; delayed
            // lookups into (t, t1] extrapolate the previous piece.
            std::vector<double> fn = rhs(t1, xn);
            traj.push_step({t, t1, x, xn, fx, fn});
            x = std::move(xn);
            fx = std::move(fn);
        }
    }
    return traj;
}

/// Builds the linear comparison system x' = M0 x + sum Mi x(t - h_i(t)) as a
/// SystemSpec (epsilon shift included in M0 when set).
inline SystemSpec linear_system(const BoundMatrices& b, double delay_bound) {
    b.validate();
    RMatrix m0 = b.m0;
    for (std::size_t i = 0; i < m0.rows(); ++i) m0(i, i) += b.epsilon_shift;
    auto mi = b.mi;
    const std::size_t d = m0.rows();
    SystemSpec sys(d, mi.size(), delay_bound,
                   [m0, mi, d](double, const std::vector<double>& x,
                               const std::vector<std::vector<double>>& y) {
                       auto out = m0.apply(x);
                       for (std::size_t i = 0; i < mi.size(); ++i) {
                           const auto add = mi[i].apply(y[i]);
                           for (std::size_t j = 0; j < d; ++j) out[j] += add[j];
                       }
                       return out;
                   });
    double l = m0.norm_inf();
    for (const auto& m : mi) l = std::max(l, m.norm_inf());
    sys.set_lipschitz_constant(l);
    sys.set_name("linear");
    return sys;
}

inline Trajectory integrate(const BoundMatrices& b, const DelaySignal& h,
                            const HistoryFunction& phi, double t_end, double step = 0.0) {
    return integrate(linear_system(b, phi.horizon()), h, phi, t_end, step);
}

/// Flow-map window: the restriction s in [-T,0] |-> x(t+s), resampled onto
/// the standard history grid.
inline HistoryFunction window(const Trajectory& traj, double t,
                              std::size_t grid = kDefaultHistoryGrid) {
    if (t < traj.start_time() - 1e-12 || t > traj.end_time() + 1e-12)
        throw std::domain_error("window: t outside trajectory span");
    const double big_t = traj.horizon();
    std::vector<std::vector<double>> values(grid);
    for (std::size_t k = 0; k < grid; ++k) {
        const double s = -big_t + big_t * static_cast<double>(k) / (grid - 1);
        values[k] = traj.evaluate(t + s);
    }
    return HistoryFunction::sampled(std::move(values), big_t);
}

/// Advances the LI_tau lattice state one tau-step at a time with the exact
/// variation-of-parameters formula (requires nonsingular M0).
/// State layout: (x(0), x(-tau), ..., x(-n_tau*tau)) stacked.
inline std::vector<std::vector<double>> exact_step_linear(const BoundMatrices& b,
                                                          const LiTauDelay& li,
                                                          const std::vector<double>& phi_grid,
                                                          std::size_t steps) {
    b.validate();
    const std::size_t d = b.dim();
    const std::size_t n_tau = li.n_tau;
    if (phi_grid.size() != (n_tau + 1) * d)
        throw std::invalid_argument("exact_step_linear: grid vector has wrong size");
    if (li.components() != b.delay_count())
        throw std::invalid_argument("exact_step_linear: delay count mismatch");

    const RMatrix e = expm(b.m0, li.tau);
    RMatrix e_minus_i = e;
    for (std::size_t i = 0; i < d; ++i) e_minus_i(i, i) -= 1.0;
    const RMatrix kernel = solve_linear(b.m0, e_minus_i);  // M0^{-1}(e^{M0 tau} - I)
    std::vector<RMatrix> km;  // kernel * Mi
    km.reserve(b.mi.size());
    for (const auto& m : b.mi) km.push_back(kernel * m);

    std::vector<std::vector<double>> out;
    out.reserve(steps + 1);
    out.push_back(phi_grid);
    std::vector<double> cur = phi_grid;
    for (std::size_t s = 0; s < steps; ++s) {
        std::vector<double> head(cur.begin(), cur.begin() + d);
        std::vector<double> top = e.apply(head);
        for (std::size_t i = 0; i < b.mi.size(); ++i) {
            if (s >= li.table[i].size())
                throw std::out_of_range("exact_step_linear: LI_tau table too short");
            const auto n_i = static_cast<std::size_t>(li.table[i][s]);
            if (n_i > n_tau) throw std::invalid_argument("exact_step_linear: index exceeds n_tau");
            std::vector<double> lagged(cur.begin() + n_i * d, cur.begin() + (n_i + 1) * d);
            const auto add = km[i].apply(lagged);
            for (std::size_t j = 0; j < d; ++j) top[j] += add[j];
        }
        std::vector<double> next((n_tau + 1) * d);
        std::copy(top.begin(), top.end(), next.begin());
        std::copy(cur.begin(), cur.end() - d, next.begin() + d);
        out.push_back(next);
        cur = std::move(next);
    }
    return out;
}

struct PositivityReport {
    double min_value = 0.0;
    double arg_t = 0.0;
    std::size_t arg_component = 0;
    bool pass = false;
};

/// Integrates the linear comparison system from a nonnegative history and
/// reports the minimum over a dense grid (Prop.: R is a positive operator).
inline PositivityReport check_positivity(const BoundMatrices& b, const DelaySignal& h,
                                         const HistoryFunction& phi, double t_end,
                                         double step = 0.0, double tol = 1e-9) {
    const auto traj = integrate(b, h, phi, t_end, step);
    PositivityReport rep;
    rep.min_value = std::numeric_limits<double>::infinity();
    const std::size_t grid = 4096;
    for (std::size_t k = 0; k <= grid; ++k) {
        const double t = t_end * static_cast<double>(k) / grid;
        const auto x = traj.evaluate(t);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < rep.min_value) {
                rep.min_value = x[i];
                rep.arg_t = t;
                rep.arg_component = i;
            }
        }
    }
    rep.pass = rep.min_value >= -tol;
    return rep;
}

struct DecayFit {
    double rate = 0.0;       // beta_hat; positive means exponential decay
    double prefactor = 0.0;  // C_hat
    double residual = 0.0;   // rms residual of the log-linear fit
    std::size_t samples = 0;
};

/// Least-squares fit of log||x(t)||_1 against t on [t_skip, end].
inline DecayFit decay_fit(const Trajectory& traj, double t_skip, std::size_t grid = 512) {
    const double t1 = traj.end_time();
    if (t1 - t_skip < 5 * traj.horizon())
        throw std::invalid_argument("decay_fit: trajectory must span >= 5T beyond t_skip");
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k <= grid; ++k) {
        const double t = t_skip + (t1 - t_skip) * static_cast<double>(k) / grid;
        const double n = norm1(traj.evaluate(t));
        if (n > 1e-13) {
            ts.push_back(t);
            ys.push_back(std::log(n));
        }
    }
    if (ts.size() < 8) throw std::runtime_error("decay_fit: too few valid samples");
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        st += ts[k]; sy += ys[k]; stt += ts[k] * ts[k]; sty += ts[k] * ys[k];
    }
    const auto n = static_cast<double>(ts.size());
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    const double icpt = (sy - slope * st) / n;
    double rss = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double e = ys[k] - (icpt + slope * ts[k]);
        rss += e * e;
    }
    DecayFit fit;
    fit.rate = -slope;
    fit.prefactor = std::exp(icpt);
    fit.residual = std::sqrt(rss / n);
    fit.samples = ts.size();
    return fit;
}

}  // namespace delaygauge
