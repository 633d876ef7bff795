#pragma once

// Initial-condition functions phi : [-T, 0] -> R^d, either closed-form or as
// a sampled grid with cubic-Hermite interpolation, plus the norm evaluators
// used throughout (sup norm, Lipschitz estimate, and their sum).

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "delaygauge/interp.hpp"

namespace delaygauge {

inline constexpr std::size_t kDefaultHistoryGrid = 2049;

class HistoryFunction {
public:
    using Evaluator = std::function<std::vector<double>(double)>;

    HistoryFunction() = default;

    HistoryFunction(Evaluator f, double horizon, std::size_t dim)
        : eval_(std::move(f)), horizon_(horizon), dim_(dim) {
        if (horizon_ <= 0) throw std::invalid_argument("history horizon must be positive");
    }

    static HistoryFunction constant(std::vector<double> value, double horizon) {
        const std::size_t d = value.size();
        return HistoryFunction([v = std::move(value)](double) { return v; }, horizon, d);
    }

    /// Sampled representation on a uniform grid over [-horizon, 0]; values[k]
    /// is the state at s = -horizon + k * horizon/(n-1). Interpolated with a
    /// cubic Hermite (Catmull-Rom tangents).
    static HistoryFunction sampled(std::vector<std::vector<double>> values, double horizon) {
        if (values.size() < 2) throw std::invalid_argument("sampled history needs >= 2 points");
        const std::size_t d = values.front().size();
        const std::size_t n = values.size();
        const double dt = horizon / static_cast<double>(n - 1);
        auto data = std::make_shared<std::vector<std::vector<double>>>(std::move(values));
        auto f = [data, horizon, dt, n, d](double s) {
            double u = (s + horizon) / dt;
            u = std::min(std::max(u, 0.0), static_cast<double>(n - 1));
            std::size_t k = std::min(static_cast<std::size_t>(u), n - 2);
            const double w = u - static_cast<double>(k);
            std::vector<double> out(d);
            for (std::size_t i = 0; i < d; ++i) {
                const double y0 = (*data)[k][i], y1 = (*data)[k + 1][i];
                const double m0 = (k > 0) ? 0.5 * (y1 - (*data)[k - 1][i]) : y1 - y0;
                const double m1 = (k + 2 < n) ? 0.5 * ((*data)[k + 2][i] - y0) : y1 - y0;
                out[i] = hermite_cubic(y0, m0, y1, m1, w);
            }
            return out;
        };
        return HistoryFunction(std::move(f), horizon, d);
    }

    std::vector<double> operator()(double s) const {
        // Clamp interpolation-level noise just outside the domain.
        if (s < -horizon_ - 1e-9 || s > 1e-9)
            throw std::domain_error("history evaluated outside [-T, 0]");
        return eval_(std::min(std::max(s, -horizon_), 0.0));
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t dim() const noexcept { return dim_; }
    bool valid() const noexcept { return static_cast<bool>(eval_); }

    /// Sup norm over a uniform sample grid (1-norm on R^d).
    double c0_norm(std::size_t grid = kDefaultHistoryGrid) const {
        double best = 0.0;
        for (std::size_t k = 0; k < grid; ++k) {
            const double s = -horizon_ + horizon_ * static_cast<double>(k) / (grid - 1);
            const auto v = eval_(s);
            double n1 = 0.0;
            for (double x : v) n1 += std::abs(x);
            best = std::max(best, n1);
        }
        return best;
    }

    /// Max divided difference over the sample grid.
    double lipschitz(std::size_t grid = kDefaultHistoryGrid) const {
        double best = 0.0;
        const double dt = horizon_ / static_cast<double>(grid - 1);
        auto prev = eval_(-horizon_);
        for (std::size_t k = 1; k < grid; ++k) {
            const double s = -horizon_ + dt * static_cast<double>(k);
            const auto cur = eval_(s);
            double n1 = 0.0;
            for (std::size_t i = 0; i < cur.size(); ++i) n1 += std::abs(cur[i] - prev[i]);
            best = std::max(best, n1 / dt);
            prev = cur;
        }
        return best;
    }

    double c01_norm(std::size_t grid = kDefaultHistoryGrid) const {
        return c0_norm(grid) + lipschitz(grid);
    }

private:
    Evaluator eval_;
    double horizon_ = 0.0;
    std::size_t dim_ = 0;
};

inline double norm1(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

}  // namespace delaygauge
