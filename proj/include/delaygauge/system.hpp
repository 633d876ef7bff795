#pragma once

// DDE instances x'(t) = f(t, x(t), x(t-h_1(t)), ..., x(t-h_r(t))).

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaygauge/delay.hpp"
#include "delaygauge/history.hpp"

namespace delaygauge {

class SystemSpec {
public:
    // y holds the delayed states, one vector per delay.
    using Rhs = std::function<std::vector<double>(double t, const std::vector<double>& x,
                                                  const std::vector<std::vector<double>>& y)>;

    SystemSpec() = default;
    SystemSpec(std::size_t dim, std::size_t delay_count, double delay_bound, Rhs rhs)
        : dim_(dim), delay_count_(delay_count), delay_bound_(delay_bound), rhs_(std::move(rhs)) {
        if (delay_bound_ <= 0) throw std::invalid_argument("delay bound T must be positive");
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t delay_count() const noexcept { return delay_count_; }
    double delay_bound() const noexcept { return delay_bound_; }

    std::vector<double> rhs(double t, const std::vector<double>& x,
                            const std::vector<std::vector<double>>& y) const {
        auto out = rhs_(t, x, y);
        if (out.size() != dim_) throw std::logic_error("rhs returned wrong dimension");
        return out;
    }

    const std::optional<double>& lipschitz_constant() const noexcept { return lipschitz_; }
    void set_lipschitz_constant(double l) { lipschitz_ = l; }

    bool complex_valued() const noexcept { return complex_valued_; }
    void set_complex_valued(bool c) noexcept { complex_valued_ = c; }

    const std::string& name() const noexcept { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }

private:
    std::size_t dim_ = 0;
    std::size_t delay_count_ = 0;
    double delay_bound_ = 0.0;
    Rhs rhs_;
    std::optional<double> lipschitz_;
    bool complex_valued_ = false;
    std::string name_;
};

}  // namespace delaygauge
