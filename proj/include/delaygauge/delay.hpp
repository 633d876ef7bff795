#pragma once

// Time-delay signals h(t): constant vectors, mod-periodic ramps, sinusoid
// sums, the piecewise-linear LI_tau class, and sampled signals. Discontinuous
// signals are evaluated right-continuously.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace delaygauge {

class delay_bound_error : public std::runtime_error {
public:
    delay_bound_error(std::size_t component, double t, double value, double bound)
        : std::runtime_error("delay component " + std::to_string(component) + " at t=" +
                             std::to_string(t) + " is " + std::to_string(value) +
                             ", outside [0, " + std::to_string(bound) + "]"),
          component_(component), t_(t) {}
    std::size_t component() const noexcept { return component_; }
    double t() const noexcept { return t_; }

private:
    std::size_t component_;
    double t_;
};

struct ConstantDelay {
    std::vector<double> values;
};

// h(t) = t mod period, one component.
struct ModDelay {
    double period = 1.0;
};

struct SinusoidTerm {
    double amplitude = 0.0;
    double omega = 0.0;  // angular frequency
    double phase = 0.0;  // amplitude * sin(omega * t + phase)
};

struct SinusoidSumDelay {
    struct Component {
        double offset = 0.0;
        std::vector<SinusoidTerm> terms;
    };
    std::vector<Component> components;
};

// Piecewise-linear unit-slope delays: on (k*tau, (k+1)*tau) component i has
// value n[i][k]*tau + (t - k*tau). Right-continuous at the lattice.
struct LiTauDelay {
    double tau = 0.0;
    std::size_t n_tau = 0;  // delay horizon T' = n_tau * tau
    std::vector<std::vector<int>> table;  // table[i][k] = n_{i,k}

    std::size_t components() const noexcept { return table.size(); }
    std::size_t intervals() const noexcept { return table.empty() ? 0 : table.front().size(); }
};

// Piecewise-linear interpolation through (grid[k], values[i][k]).
struct SampledDelay {
    std::vector<double> grid;
    std::vector<std::vector<double>> values;  // values[i][k]
};

// Arithmetic progression {offset + spacing * n} of declared discontinuities.
struct DiscontinuityLattice {
    double offset = 0.0;
    double spacing = 0.0;
};

class DelaySignal {
public:
    using Repr = std::variant<ConstantDelay, ModDelay, SinusoidSumDelay, LiTauDelay, SampledDelay>;

    DelaySignal(Repr repr, std::optional<DiscontinuityLattice> lattice = std::nullopt)
        : repr_(std::move(repr)), lattice_(lattice) {
        if (std::holds_alternative<ModDelay>(repr_) && !lattice_) {
            const double p = std::get<ModDelay>(repr_).period;
            lattice_ = DiscontinuityLattice{0.0, p};
        }
        if (std::holds_alternative<LiTauDelay>(repr_) && !lattice_) {
            lattice_ = DiscontinuityLattice{0.0, std::get<LiTauDelay>(repr_).tau};
        }
    }

    static DelaySignal constant(std::vector<double> values) {
        return DelaySignal(ConstantDelay{std::move(values)});
    }
    static DelaySignal constant(double value) { return constant(std::vector<double>{value}); }
    static DelaySignal mod(double period) { return DelaySignal(ModDelay{period}); }

    std::size_t components() const {
        return std::visit(
            [](const auto& r) -> std::size_t {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantDelay>) return r.values.size();
                else if constexpr (std::is_same_v<T, ModDelay>) return 1;
                else if constexpr (std::is_same_v<T, SinusoidSumDelay>) return r.components.size();
                else if constexpr (std::is_same_v<T, LiTauDelay>) return r.components();
                else return r.values.size();
            },
            repr_);
    }

    std::vector<double> evaluate(double t) const {
        return std::visit([t](const auto& r) { return eval_impl(r, t); }, repr_);
    }

    const Repr& repr() const noexcept { return repr_; }
    const std::optional<DiscontinuityLattice>& lattice() const noexcept { return lattice_; }

    // Declared discontinuity / kink points inside [t0, t1]; the integrator
    // never steps across these.
    std::vector<double> breakpoints(double t0, double t1) const {
        std::vector<double> out;
        if (lattice_ && lattice_->spacing > 0) {
            const double b = lattice_->spacing, a = lattice_->offset;
            double n = std::ceil((t0 - a) / b);
            for (double t = a + n * b; t <= t1; t += b)
                if (t >= t0) out.push_back(t);
        }
        if (const auto* s = std::get_if<SampledDelay>(&repr_)) {
            for (double g : s->grid)
                if (g > t0 && g < t1) out.push_back(g);
        }
        return out;
    }

private:
    static std::vector<double> eval_impl(const ConstantDelay& r, double) { return r.values; }

    static std::vector<double> eval_impl(const ModDelay& r, double t) {
        double v = t - r.period * std::floor(t / r.period);
        // right-continuity: t = k*period maps to 0
        if (v >= r.period) v = 0.0;
        return {v};
    }

    static std::vector<double> eval_impl(const SinusoidSumDelay& r, double t) {
        std::vector<double> out;
        out.reserve(r.components.size());
        for (const auto& c : r.components) {
            double v = c.offset;
            for (const auto& term : c.terms) v += term.amplitude * std::sin(term.omega * t + term.phase);
            out.push_back(v);
        }
        return out;
    }

    static std::vector<double> eval_impl(const LiTauDelay& r, double t) {
        if (t < 0) throw std::domain_error("LiTauDelay: t must be nonnegative");
        const auto k = static_cast<std::size_t>(std::floor(t / r.tau + 1e-12));
        std::vector<double> out;
        out.reserve(r.table.size());
        for (const auto& row : r.table) {
            if (k >= row.size())
                throw std::out_of_range("LiTauDelay: t beyond the tabulated horizon");
            out.push_back(row[k] * r.tau + (t - k * r.tau));
        }
        return out;
    }

    static std::vector<double> eval_impl(const SampledDelay& r, double t) {
        const auto& g = r.grid;
        if (g.size() < 2) throw std::invalid_argument("SampledDelay: need at least two samples");
        std::size_t k = 0;
        if (t <= g.front()) k = 0;
        else if (t >= g.back()) k = g.size() - 2;
        else {
            // binary search for interval
            std::size_t lo = 0, hi = g.size() - 1;
            while (hi - lo > 1) {
                const std::size_t mid = (lo + hi) / 2;
                (g[mid] <= t ? lo : hi) = mid;
            }
            k = lo;
        }
        const double w = (t - g[k]) / (g[k + 1] - g[k]);
        std::vector<double> out;
        out.reserve(r.values.size());
        for (const auto& row : r.values) out.push_back(row[k] + w * (row[k + 1] - row[k]));
        return out;
    }

    Repr repr_;
    std::optional<DiscontinuityLattice> lattice_;
};

/// Checks 0 <= h_i(t) <= bound over [t0, t1] by sampling at resolution
/// 1e-3 * bound plus all declared breakpoints. Throws on violation.
inline void validate_delay_range(const DelaySignal& h, double bound, double t0, double t1,
                                 double tol = 1e-9) {
    auto check_at = [&](double t) {
        const auto v = h.evaluate(t);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] < -tol || v[i] > bound + tol) throw delay_bound_error(i, t, v[i], bound);
    };
    const double res = std::max(1e-3 * bound, 1e-12);
    for (double t = t0; t <= t1 + 0.5 * res; t += res) check_at(std::min(t, t1));
    for (double b : h.breakpoints(t0, t1)) {
        check_at(b);
        check_at(std::min(b + 1e-12, t1));
    }
}

}  // namespace delaygauge
