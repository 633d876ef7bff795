#pragma once

// JSON system descriptions and CSV export. Matrices are row-major arrays of
// numbers; CSV uses full double precision (%.17g) with LF line endings.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaygauge/catalog.hpp"
#include "delaygauge/delay.hpp"
#include "delaygauge/history.hpp"
#include "delaygauge/integrator.hpp"
#include "delaygauge/reduction.hpp"
#include "delaygauge/reservoir.hpp"
#include "delaygauge/stability.hpp"

namespace delaygauge {

using json = nlohmann::json;

class schema_error : public std::runtime_error {
public:
    schema_error(const std::string& path, const std::string& what)
        : std::runtime_error("at " + path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw schema_error(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw schema_error(path + "." + key, "missing required field");
    return *it;
}

inline double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) throw schema_error(path, "expected a number");
    return j.get<double>();
}

}  // namespace detail

inline RMatrix parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw schema_error(path, "expected a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw schema_error(path + "[0]", "expected a nonempty row array");
    RMatrix m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != cols)
            throw schema_error(rp, "row length mismatch");
        for (std::size_t c = 0; c < cols; ++c)
            m(i, c) = detail::number_at(j[i][c], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

inline DelaySignal parse_delays(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw schema_error(path, "expected a nonempty array of delays");
    const auto type_of = [&](std::size_t k) {
        const std::string p = path + "[" + std::to_string(k) + "]";
        const auto& t = detail::require(j[k], "type", p);
        if (!t.is_string()) throw schema_error(p + ".type", "expected a string");
        return t.get<std::string>();
    };

    bool all_constant = true;
    for (std::size_t k = 0; k < j.size(); ++k)
        if (type_of(k) != "constant") all_constant = false;
    if (all_constant) {
        std::vector<double> values;
        for (std::size_t k = 0; k < j.size(); ++k) {
            const std::string p = path + "[" + std::to_string(k) + "]";
            values.push_back(detail::number_at(detail::require(j[k], "value", p), p + ".value"));
        }
        return DelaySignal::constant(std::move(values));
    }
    if (j.size() != 1)
        throw schema_error(path, "mixed or multiple non-constant delay entries are unsupported; "
                                 "use a single entry or all-constant entries");

    const std::string p = path + "[0]";
    const std::string type = type_of(0);
    const json& e = j[0];
    if (type == "mod")
        return DelaySignal::mod(detail::number_at(detail::require(e, "period", p), p + ".period"));
    if (type == "sinusoid_sum") {
        SinusoidSumDelay d;
        SinusoidSumDelay::Component c;
        c.offset = detail::number_at(detail::require(e, "offset", p), p + ".offset");
        const auto& terms = detail::require(e, "terms", p);
        if (!terms.is_array()) throw schema_error(p + ".terms", "expected an array");
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const std::string tp = p + ".terms[" + std::to_string(k) + "]";
            SinusoidTerm t;
            t.amplitude = detail::number_at(detail::require(terms[k], "amplitude", tp),
                                            tp + ".amplitude");
            t.omega = detail::number_at(detail::require(terms[k], "omega", tp), tp + ".omega");
            if (terms[k].contains("phase"))
                t.phase = detail::number_at(terms[k]["phase"], tp + ".phase");
            c.terms.push_back(t);
        }
        d.components.push_back(std::move(c));
        return DelaySignal(std::move(d));
    }
    if (type == "li_tau") {
        LiTauDelay d;
        d.tau = detail::number_at(detail::require(e, "tau", p), p + ".tau");
        d.n_tau = static_cast<std::size_t>(
            detail::number_at(detail::require(e, "n_tau", p), p + ".n_tau"));
        const auto& table = detail::require(e, "table", p);
        if (!table.is_array()) throw schema_error(p + ".table", "expected an array of rows");
        for (std::size_t i = 0; i < table.size(); ++i) {
            const std::string tp = p + ".table[" + std::to_string(i) + "]";
            if (!table[i].is_array()) throw schema_error(tp, "expected an array");
            std::vector<int> row;
            for (std::size_t k = 0; k < table[i].size(); ++k)
                row.push_back(static_cast<int>(
                    detail::number_at(table[i][k], tp + "[" + std::to_string(k) + "]")));
            d.table.push_back(std::move(row));
        }
        return DelaySignal(std::move(d));
    }
    if (type == "samples") {
        SampledDelay d;
        const auto& grid = detail::require(e, "grid", p);
        if (!grid.is_array()) throw schema_error(p + ".grid", "expected an array");
        for (std::size_t k = 0; k < grid.size(); ++k)
            d.grid.push_back(detail::number_at(grid[k], p + ".grid[" + std::to_string(k) + "]"));
        const auto& values = detail::require(e, "values", p);
        if (!values.is_array()) throw schema_error(p + ".values", "expected an array of rows");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::string vp = p + ".values[" + std::to_string(i) + "]";
            if (!values[i].is_array() || values[i].size() != d.grid.size())
                throw schema_error(vp, "row length must equal the grid length");
            std::vector<double> row;
            for (std::size_t k = 0; k < values[i].size(); ++k)
                row.push_back(detail::number_at(values[i][k], vp + "[" + std::to_string(k) + "]"));
            d.values.push_back(std::move(row));
        }
        return DelaySignal(std::move(d));
    }
    throw schema_error(p + ".type", "unknown delay type '" + type + "'");
}

inline HistoryFunction parse_history(const json& j, double horizon, std::size_t dim,
                                     const std::string& path) {
    const auto& t = detail::require(j, "type", path);
    if (!t.is_string()) throw schema_error(path + ".type", "expected a string");
    const std::string type = t.get<std::string>();
    if (type == "constant") {
        const auto& v = detail::require(j, "value", path);
        std::vector<double> value;
        if (v.is_number()) value.assign(dim, v.get<double>());
        else if (v.is_array())
            for (std::size_t k = 0; k < v.size(); ++k)
                value.push_back(detail::number_at(v[k], path + ".value[" + std::to_string(k) + "]"));
        else throw schema_error(path + ".value", "expected a number or array");
        if (value.size() != dim)
            throw schema_error(path + ".value", "length must equal the system dimension");
        return HistoryFunction::constant(std::move(value), horizon);
    }
    if (type == "samples") {
        const auto& v = detail::require(j, "values", path);
        if (!v.is_array() || v.size() < 2)
            throw schema_error(path + ".values", "expected >= 2 sample rows");
        std::vector<std::vector<double>> values;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const std::string vp = path + ".values[" + std::to_string(k) + "]";
            if (!v[k].is_array() || v[k].size() != dim)
                throw schema_error(vp, "sample length must equal the system dimension");
            std::vector<double> row;
            for (std::size_t c = 0; c < v[k].size(); ++c)
                row.push_back(detail::number_at(v[k][c], vp + "[" + std::to_string(c) + "]"));
            values.push_back(std::move(row));
        }
        return HistoryFunction::sampled(std::move(values), horizon);
    }
    throw schema_error(path + ".type", "unknown history type '" + type + "'");
}

struct ParsedSystem {
    SystemSpec system;
    std::optional<BoundMatrices> bounds;
    std::optional<DelaySignal> delays;
    std::optional<HistoryFunction> history;
    double big_t = 0.0;
};

/// Parses the system JSON schema: either "name" (a catalog entry) or
/// "bounds"-only (the linear comparison system assembled from M0, Mi).
inline ParsedSystem parse_system(const json& j, const std::string& path = "$") {
    if (!j.is_object()) throw schema_error(path, "expected an object");
    ParsedSystem out;

    out.big_t = j.contains("T") ? detail::number_at(j["T"], path + ".T") : 6.0;
    if (out.big_t <= 0) throw schema_error(path + ".T", "delay bound T must be positive");

    std::optional<BoundMatrices> bounds;
    if (j.contains("bounds")) {
        const std::string bp = path + ".bounds";
        BoundMatrices b;
        b.m0 = parse_matrix(detail::require(j["bounds"], "M0", bp), bp + ".M0");
        const auto& mi = detail::require(j["bounds"], "Mi", bp);
        if (!mi.is_array()) throw schema_error(bp + ".Mi", "expected an array of matrices");
        for (std::size_t k = 0; k < mi.size(); ++k)
            b.mi.push_back(parse_matrix(mi[k], bp + ".Mi[" + std::to_string(k) + "]"));
        try {
            b.validate();
        } catch (const std::exception& e) {
            throw schema_error(bp, e.what());
        }
        bounds = std::move(b);
    }

    if (j.contains("name")) {
        const auto& n = j["name"];
        if (!n.is_string()) throw schema_error(path + ".name", "expected a string");
        CatalogParams params;
        params.delay_bound = out.big_t;
        CatalogEntry entry;
        try {
            entry = catalog(n.get<std::string>(), params);
        } catch (const std::invalid_argument& e) {
            throw schema_error(path + ".name", e.what());
        }
        out.system = entry.system;
        out.bounds = bounds ? bounds : std::optional<BoundMatrices>(entry.bounds);
    } else if (bounds) {
        out.system = linear_system(*bounds, out.big_t);
        out.bounds = bounds;
    } else {
        throw schema_error(path, "either \"name\" or \"bounds\" is required");
    }

    if (j.contains("dim")) {
        const auto d = static_cast<std::size_t>(detail::number_at(j["dim"], path + ".dim"));
        if (d != out.system.dim())
            throw schema_error(path + ".dim", "declared dimension disagrees with the system");
    }
    if (j.contains("delays")) {
        out.delays = parse_delays(j["delays"], path + ".delays");
        if (out.delays->components() != out.system.delay_count())
            throw schema_error(path + ".delays", "delay count disagrees with the system");
    }
    if (j.contains("history"))
        out.history = parse_history(j["history"], out.big_t, out.system.dim(), path + ".history");
    return out;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, double dt) {
    os << "t";
    for (std::size_t i = 1; i <= traj.dim(); ++i) os << ",x" << i;
    os << "\n";
    const double t1 = traj.end_time();
    for (double t = traj.start_time(); t <= t1 + 0.5 * dt; t += dt) {
        const double tc = std::min(t, t1);
        os << format_double(tc);
        for (double v : traj.evaluate(tc)) os << "," << format_double(v);
        os << "\n";
    }
}

inline void write_matrix_csv(std::ostream& os, const RMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ",";
            os << format_double(m(i, j));
        }
        os << "\n";
    }
}

inline void write_trend_csv(std::ostream& os, const std::vector<JsrTrendRow>& rows) {
    os << "n,tau,sup_rho,beta_hat\n";
    for (const auto& r : rows)
        os << r.n << "," << format_double(r.tau) << "," << format_double(r.sup_rho) << ","
           << format_double(r.beta_hat) << "\n";
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "beta,delta,abscissa,region_ok,gamma_sq\n";
    for (const auto& r : rows)
        os << format_double(r.beta) << "," << format_double(r.delta) << ","
           << format_double(r.abscissa) << "," << (r.region_ok ? 1 : 0) << ","
           << format_double(r.gamma_sq) << "\n";
}

/// Whitespace-separated rows, one line per row (the `reduce` stdin format).
inline RMatrix read_matrix_text(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("matrix input is empty");
    RMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols())
            throw std::invalid_argument("matrix input has ragged rows");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

}  // namespace delaygauge
