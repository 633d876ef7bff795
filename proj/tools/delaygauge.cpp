// delaygauge: stability analysis of delay differential equations with
// time-varying delays, from the command line.
//
// Exit codes: 0 success, 2 validation/config error, 3 numerical failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "delaygauge/comparison.hpp"
#include "delaygauge/discretize.hpp"
#include "delaygauge/io.hpp"
#include "delaygauge/reduction.hpp"
#include "delaygauge/reservoir.hpp"

namespace dg = delaygauge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DELAYGAUGE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

dg::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dg::schema_error("$", "cannot open config file " + path);
    dg::json j;
    try {
        in >> j;
    } catch (const dg::json::parse_error& e) {
        throw dg::schema_error("$", std::string("malformed JSON: ") + e.what());
    }
    return j;
}

dg::ParsedSystem load_system(const std::string& name, const std::string& config_path,
                             double big_t) {
    if (!config_path.empty()) return dg::parse_system(load_json(config_path));
    if (name.empty()) throw dg::schema_error("$", "either --system or --config is required");
    dg::json j{{"name", name}, {"T", big_t}};
    return dg::parse_system(j);
}

std::vector<double> parse_number_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    if (out.empty()) throw std::invalid_argument("empty number list: '" + s + "'");
    return out;
}

// Delay spec strings: "const:v1[,v2,...]" (or a bare number), "mod:P",
// "sinsum:offset;a,w[,phase];a,w[,phase];..."
dg::DelaySignal parse_delay_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = (colon == std::string::npos) ? "const" : spec.substr(0, colon);
    const std::string rest = (colon == std::string::npos) ? spec : spec.substr(colon + 1);
    if (kind == "const") return dg::DelaySignal::constant(parse_number_list(rest));
    if (kind == "mod") return dg::DelaySignal::mod(std::stod(rest));
    if (kind == "sinsum") {
        std::stringstream ss(rest);
        std::string piece;
        dg::SinusoidSumDelay d;
        dg::SinusoidSumDelay::Component c;
        bool first = true;
        while (std::getline(ss, piece, ';')) {
            if (first) {
                c.offset = std::stod(piece);
                first = false;
                continue;
            }
            const auto nums = parse_number_list(piece);
            if (nums.size() < 2 || nums.size() > 3)
                throw std::invalid_argument("sinsum term needs amplitude,omega[,phase]");
            dg::SinusoidTerm t;
            t.amplitude = nums[0];
            t.omega = nums[1];
            if (nums.size() == 3) t.phase = nums[2];
            c.terms.push_back(t);
        }
        if (first) throw std::invalid_argument("sinsum spec needs an offset");
        d.components.push_back(std::move(c));
        return dg::DelaySignal(std::move(d));
    }
    throw std::invalid_argument("unknown delay spec '" + spec + "'");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
    if (!out) throw std::invalid_argument("cannot open output file " + path);
    return out;
}

struct CheckOpts {
    std::string system, config;
    double big_t = 6.0;
};

int run_check(const CheckOpts& o) {
    const auto parsed = load_system(o.system, o.config, o.big_t);
    if (!parsed.bounds) throw dg::schema_error("$", "check requires bound matrices");
    dg::BoundMatrices b = *parsed.bounds;
    if (parsed.system.complex_valued()) b.epsilon_shift = dg::choose_epsilon_shift(b);
    const auto v = dg::stability_matrix(b);
    std::cout << "stability matrix:\n";
    dg::write_matrix_csv(std::cout, v.stability_matrix);
    std::cout << "abscissa " << dg::format_double(v.abscissa) << "\n"
              << "verdict " << (v.intrinsically_stable ? "STABLE" : "NOT-INTRINSICALLY-STABLE")
              << "\n";
    if (v.heuristic) std::cout << "caveat: bounds were estimated by sampling\n";
    return kExitOk;
}

struct SimulateOpts {
    std::string system, config, delay, out, history;
    double t_end = 40.0, step = 0.0, big_t = 6.0, sample_dt = 1e-2;
    bool linear = false;
};

int run_simulate(const SimulateOpts& o) {
    auto parsed = load_system(o.system, o.config, o.big_t);
    dg::DelaySignal h = parsed.delays ? *parsed.delays
                                      : dg::DelaySignal::constant(std::vector<double>(
                                            parsed.system.delay_count(), 1.0));
    if (!o.delay.empty()) h = parse_delay_spec(o.delay);
    if (h.components() != parsed.system.delay_count())
        throw dg::schema_error("$.delays", "delay count disagrees with the system");
    dg::validate_delay_range(h, parsed.system.delay_bound(), 0.0, o.t_end);

    dg::HistoryFunction phi =
        parsed.history ? *parsed.history
                       : dg::HistoryFunction::constant(
                             std::vector<double>(parsed.system.dim(), 1.0),
                             parsed.system.delay_bound());
    if (!o.history.empty())
        phi = dg::HistoryFunction::constant(parse_number_list(o.history),
                                            parsed.system.delay_bound());

    dg::Trajectory traj = o.linear && parsed.bounds
                              ? dg::integrate(*parsed.bounds, h, phi, o.t_end, o.step)
                              : dg::integrate(parsed.system, h, phi, o.t_end, o.step);
    if (o.out.empty()) {
        dg::write_trajectory_csv(std::cout, traj, o.sample_dt);
    } else {
        auto out = open_out(o.out);
        dg::write_trajectory_csv(out, traj, o.sample_dt);
        std::cout << "wrote " << o.out << "\n";
    }
    return kExitOk;
}

struct CompareOpts {
    std::string system, config, delay;
    double t_end = 10.0, tol = 1e-6, step = 1e-3, big_t = 6.0;
    unsigned seed = 1;
};

int run_compare(const CompareOpts& o) {
    const auto parsed = load_system(o.system, o.config, o.big_t);
    if (!parsed.bounds) throw dg::schema_error("$", "compare requires bound matrices");
    dg::DelaySignal h = o.delay.empty()
                            ? dg::DelaySignal::constant(std::vector<double>(
                                  parsed.system.delay_count(), 1.0))
                            : parse_delay_spec(o.delay);
    const auto phi1 = dg::random_history(parsed.system.dim(), parsed.system.delay_bound(), o.seed);
    const auto phi2 =
        dg::random_history(parsed.system.dim(), parsed.system.delay_bound(), o.seed + 999331);
    const auto rep = dg::verify_comparison(parsed.system, *parsed.bounds, phi1, phi2, h, o.t_end,
                                           o.tol, o.step);
    dg::json j{{"pass", rep.pass},
               {"max_violation", rep.max_violation},
               {"arg_t", rep.arg_t},
               {"arg_component", rep.arg_component}};
    std::cout << j.dump(2) << "\n";
    return rep.pass ? kExitOk : kExitNumerical;
}

struct DiscretizeOpts {
    std::string system, config, delay, out_prefix = "companion";
    double tau = 0.1, t_prime = 2.0, t_end = 5.0, big_t = 6.0;
};

int run_discretize(const DiscretizeOpts& o) {
    const auto parsed = load_system(o.system, o.config, o.big_t);
    if (!parsed.bounds) throw dg::schema_error("$", "discretize requires bound matrices");
    dg::DelaySignal h = o.delay.empty()
                            ? dg::DelaySignal::constant(std::vector<double>(
                                  parsed.system.delay_count(), 1.0))
                            : parse_delay_spec(o.delay);
    const auto approx = dg::approximate_delay(h, o.tau, o.t_prime, o.t_end);
    std::cout << "tau " << dg::format_double(o.tau) << " n_tau " << approx.li.n_tau
              << " sup_error_bound " << dg::format_double(approx.sup_error_bound) << "\n";
    {
        auto out = open_out(o.out_prefix + "_table.csv");
        for (const auto& row : approx.li.table) {
            for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
            out << "\n";
        }
    }
    const std::size_t intervals = approx.li.intervals();
    for (std::size_t k = 0; k < intervals; ++k) {
        const auto c = dg::build_companion(*parsed.bounds, approx.li, k);
        auto out = open_out(o.out_prefix + "_" + std::to_string(k) + ".csv");
        dg::write_matrix_csv(out, c.assembled);
    }
    std::cout << "wrote " << o.out_prefix << "_table.csv and " << intervals
              << " companion matrices\n";
    return kExitOk;
}

struct ReduceOpts {
    std::string input, indices;
    double lambda_re = 0.0, lambda_im = 0.0;
    bool isoradial = false;
};

int run_reduce(const ReduceOpts& o) {
    dg::RMatrix m;
    if (o.input.empty() || o.input == "-") {
        m = dg::read_matrix_text(std::cin);
    } else {
        std::ifstream in(o.input);
        if (!in) throw std::invalid_argument("cannot open matrix file " + o.input);
        m = dg::read_matrix_text(in);
    }
    std::vector<std::size_t> s;
    for (double v : parse_number_list(o.indices)) s.push_back(static_cast<std::size_t>(v));

    if (o.isoradial) {
        const auto r = dg::isoradial_reduce(m, s);
        std::cout << "rho_original " << dg::format_double(r.rho_original) << "\n"
                  << "rho_reduced " << dg::format_double(r.rho_reduced) << "\n"
                  << "radius_preserved " << (r.radius_preserved ? 1 : 0) << "\n";
        dg::write_matrix_csv(std::cout, r.reduced);
    } else {
        const auto red =
            dg::isospectral_reduce(m, s, dg::complexd(o.lambda_re, o.lambda_im));
        for (std::size_t i = 0; i < red.rows(); ++i) {
            for (std::size_t j = 0; j < red.cols(); ++j)
                std::cout << (j ? "," : "") << dg::format_double(red(i, j).real()) << "+"
                          << dg::format_double(red(i, j).imag()) << "i";
            std::cout << "\n";
        }
    }
    return kExitOk;
}

struct JsrOpts {
    std::string system, config, n_list = "4,8,16", out;
    double t0 = 1.0, big_t = 6.0;
    std::size_t cap = 1000000;
};

int run_jsr(const JsrOpts& o) {
    const auto parsed = load_system(o.system, o.config, o.big_t);
    if (!parsed.bounds) throw dg::schema_error("$", "jsr requires bound matrices");
    std::vector<std::size_t> ns;
    for (double v : parse_number_list(o.n_list)) ns.push_back(static_cast<std::size_t>(v));
    const auto rows = dg::jsr_trend(*parsed.bounds, o.t0, ns, o.cap);
    if (o.out.empty()) {
        dg::write_trend_csv(std::cout, rows);
    } else {
        auto out = open_out(o.out);
        dg::write_trend_csv(out, rows);
        std::cout << "wrote " << o.out << "\n";
    }
    return kExitOk;
}

struct ReservoirOpts {
    std::string betas = "0.333333333333333333", deltas = "0.125", out;
    std::string delays = "0.4,0.7,1.0";
    double t_end = 30.0, t_skip = 5.0, step = 0.0;
    unsigned seed = 1;
};

int run_reservoir(const ReservoirOpts& o) {
    const auto betas = parse_number_list(o.betas);
    const auto deltas = parse_number_list(o.deltas);
    const auto delays = parse_number_list(o.delays);
    const auto j = dg::lorenz_input(o.t_end, 1e-3);

    std::vector<std::pair<double, double>> points;
    for (double b : betas)
        for (double d : deltas) points.push_back({b, d});
    std::vector<dg::SweepRow> rows(points.size());

    const unsigned workers = std::min<unsigned>(worker_count(), points.size());
    auto work = [&](unsigned w) {
        for (std::size_t k = w; k < points.size(); k += workers)
            rows[k] = dg::consistency_sweep_point(points[k].first, points[k].second, j, o.t_end,
                                                  o.t_skip, o.seed, delays, o.step);
    };
    if (workers > 1) {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    } else {
        work(0);
    }

    if (o.out.empty()) {
        dg::write_sweep_csv(std::cout, rows);
    } else {
        auto out = open_out(o.out);
        dg::write_sweep_csv(out, rows);
        std::cout << "wrote " << o.out << "\n";
    }
    return kExitOk;
}

struct ReproOpts {
    std::string out_dir = "repro";
};

int run_repro(const ReproOpts& o) {
    namespace fs = std::filesystem;
    fs::create_directories(o.out_dir);
    const std::string dir = o.out_dir + "/";

    // Stability summaries of the two catalog examples.
    {
        auto out = open_out(dir + "stability_summary.csv");
        out << "system,abscissa,stable\n";
        for (const std::string name : {"nis-example", "is-example"}) {
            const auto e = dg::catalog(name);
            const auto v = dg::stability_matrix(e.bounds);
            out << name << "," << dg::format_double(v.abscissa) << ","
                << (v.intrinsically_stable ? 1 : 0) << "\n";
        }
    }

    // Trajectories: unstable example under the mod-2 delay, stable example
    // under constant, mod-2 and sinusoid-sum delays.
    const auto phi2 = dg::HistoryFunction::constant({1.0, 1.0}, 6.0);
    auto dump = [&](const std::string& file, const dg::CatalogEntry& e, const dg::DelaySignal& h,
                    double t_end) {
        auto traj = dg::integrate(e.system, h, phi2, t_end);
        auto out = open_out(dir + file);
        dg::write_trajectory_csv(out, traj, 1e-2);
    };
    const auto nis = dg::catalog("nis-example");
    const auto is = dg::catalog("is-example");
    dump("unstable_mod2.csv", nis, dg::DelaySignal::mod(2.0), 40.0);
    dump("unstable_const1.csv", nis, dg::DelaySignal::constant(1.0), 40.0);
    dump("stable_const3.csv", is, dg::DelaySignal::constant(3.0), 40.0);
    dump("stable_mod2.csv", is, dg::DelaySignal::mod(2.0), 40.0);
    {
        dg::SinusoidSumDelay d;
        dg::SinusoidSumDelay::Component c;
        c.offset = 3.0;
        c.terms = {{1.0, 4.0, 0.0},
                   {1.0, 3.14159265358979323846, 0.0},
                   {1.0, std::sqrt(3.0), 1.57079632679489661923}};
        d.components.push_back(c);
        dump("stable_sinusoid.csv", is, dg::DelaySignal(std::move(d)), 40.0);
    }

    // Reservoir consistency at the reference parameter point.
    {
        const auto j = dg::lorenz_input(30.0, 1e-3);
        std::vector<dg::SweepRow> rows{
            dg::consistency_sweep_point(1.0 / 3.0, 0.125, j, 30.0, 5.0, 1)};
        auto out = open_out(dir + "consistency_sweep.csv");
        dg::write_sweep_csv(out, rows);
    }
    std::cout << "wrote 7 files under " << o.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delaygauge: intrinsic-stability analysis for delay differential equations"};
    app.require_subcommand(1);

    CheckOpts check;
    auto* c_check = app.add_subcommand("check", "stability verdict for a system");
    c_check->add_option("--system", check.system, "catalog system name");
    c_check->add_option("--config", check.config, "system JSON file");
    c_check->add_option("--T", check.big_t, "delay bound");

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "integrate and export a trajectory CSV");
    c_sim->add_option("--system", sim.system, "catalog system name");
    c_sim->add_option("--config", sim.config, "system JSON file");
    c_sim->add_option("--delay", sim.delay, "delay spec (const:..., mod:P, sinsum:...)");
    c_sim->add_option("--t-end", sim.t_end, "integration horizon");
    c_sim->add_option("--step", sim.step, "integrator step (0 = default)");
    c_sim->add_option("--T", sim.big_t, "delay bound");
    c_sim->add_option("--history", sim.history, "constant history values v1,v2,...");
    c_sim->add_option("--out", sim.out, "output CSV path (default stdout)");
    c_sim->add_option("--sample-dt", sim.sample_dt, "CSV sampling interval");
    c_sim->add_flag("--linear", sim.linear, "integrate the linear comparison system");

    CompareOpts cmp;
    auto* c_cmp = app.add_subcommand("compare", "comparison-principle report");
    c_cmp->add_option("--system", cmp.system, "catalog system name");
    c_cmp->add_option("--config", cmp.config, "system JSON file");
    c_cmp->add_option("--delay", cmp.delay, "delay spec");
    c_cmp->add_option("--t-end", cmp.t_end, "horizon");
    c_cmp->add_option("--tol", cmp.tol, "violation tolerance");
    c_cmp->add_option("--step", cmp.step, "integrator step");
    c_cmp->add_option("--seed", cmp.seed, "random history seed");
    c_cmp->add_option("--T", cmp.big_t, "delay bound");

    DiscretizeOpts dis;
    auto* c_dis = app.add_subcommand("discretize", "LI_tau table and companion matrix export");
    c_dis->add_option("--system", dis.system, "catalog system name");
    c_dis->add_option("--config", dis.config, "system JSON file");
    c_dis->add_option("--delay", dis.delay, "delay spec");
    c_dis->add_option("--tau", dis.tau, "lattice spacing");
    c_dis->add_option("--t-prime", dis.t_prime, "delay horizon T' (multiple of tau)");
    c_dis->add_option("--t-end", dis.t_end, "tabulation horizon");
    c_dis->add_option("--T", dis.big_t, "delay bound");
    c_dis->add_option("--out-prefix", dis.out_prefix, "output file prefix");

    ReduceOpts red;
    auto* c_red = app.add_subcommand("reduce", "isospectral/isoradial reduction of a matrix");
    c_red->add_option("--input", red.input, "matrix file (whitespace rows; - or empty = stdin)");
    c_red->add_option("--indices", red.indices, "kept index set, comma separated")->required();
    c_red->add_option("--lambda-re", red.lambda_re, "evaluation point, real part");
    c_red->add_option("--lambda-im", red.lambda_im, "evaluation point, imaginary part");
    c_red->add_flag("--isoradial", red.isoradial, "reduce at lambda = spectral radius");

    JsrOpts jsr;
    auto* c_jsr = app.add_subcommand("jsr", "discretized-family radius trend table");
    c_jsr->add_option("--system", jsr.system, "catalog system name");
    c_jsr->add_option("--config", jsr.config, "system JSON file");
    c_jsr->add_option("--t0", jsr.t0, "base horizon t0 (tau = t0/n)");
    c_jsr->add_option("--n", jsr.n_list, "comma-separated n values");
    c_jsr->add_option("--cap", jsr.cap, "enumeration cap before sampling");
    c_jsr->add_option("--T", jsr.big_t, "delay bound");
    c_jsr->add_option("--out", jsr.out, "output CSV path (default stdout)");

    ReservoirOpts res;
    auto* c_res = app.add_subcommand("reservoir", "consistency sweep over (beta, delta)");
    c_res->add_option("--beta", res.betas, "comma-separated beta values");
    c_res->add_option("--delta", res.deltas, "comma-separated delta values");
    c_res->add_option("--delays", res.delays, "comma-separated constant delays");
    c_res->add_option("--t-end", res.t_end, "simulation horizon");
    c_res->add_option("--t-skip", res.t_skip, "transient discard");
    c_res->add_option("--step", res.step, "integrator step (0 = default)");
    c_res->add_option("--seed", res.seed, "random history seed");
    c_res->add_option("--out", res.out, "output CSV path (default stdout)");

    ReproOpts rep;
    auto* c_rep = app.add_subcommand("repro", "regenerate the reference data files");
    c_rep->add_option("--out-dir", rep.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*c_check) return run_check(check);
        if (*c_sim) return run_simulate(sim);
        if (*c_cmp) return run_compare(cmp);
        if (*c_dis) return run_discretize(dis);
        if (*c_red) return run_reduce(red);
        if (*c_jsr) return run_jsr(jsr);
        if (*c_res) return run_reservoir(res);
        if (*c_rep) return run_repro(rep);
    } catch (const dg::schema_error& e) {
        std::cerr << "schema error " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const dg::divergence_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitValidation;
}
