// Serial-vs-OpenMP timing for the data-parallel kernels, with a bitwise
// equality check between the two paths. Run: openpop_bench [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "openpop/inference.hpp"
#include "openpop/parallel.hpp"
#include "openpop/predictive.hpp"
#include "openpop/simulate.hpp"

using namespace openpop;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

ComponentPrior prior_normal(double m, double sd) {
    return {ComponentPrior::Kind::normal, m, sd};
}
ComponentPrior prior_lognormal(double ml, double sl) {
    return {ComponentPrior::Kind::lognormal, ml, sl};
}

struct Row {
    std::string name;
    std::size_t items;
    double serial_ms;
    double parallel_ms;
    bool identical;
};

void print_row(const Row& r) {
    std::printf("%-28s %10zu %12.1f %12.1f %8.2fx   %s\n", r.name.c_str(), r.items,
                r.serial_ms, r.parallel_ms, r.serial_ms / r.parallel_ms,
                r.identical ? "bit-identical" : "MISMATCH");
}

Row bench_surface(const Family& fam, const PriorSpec& prior, const Dataset& data,
                  const std::string& name, int side, double lo0, double hi0,
                  double lo1, double hi1) {
    std::vector<ParamVector> nodes;
    nodes.reserve(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (int i = 1; i <= side; ++i) {
        for (int j = 1; j <= side; ++j) {
            nodes.push_back(ParamVector{lo0 + (hi0 - lo0) * i / side,
                                        lo1 + (hi1 - lo1) * j / side});
        }
    }
    auto t0 = Clock::now();
    const auto serial = log_posterior_at(fam, prior, data, nodes, false);
    const double serial_ms = ms_since(t0);
    t0 = Clock::now();
    const auto parallel = log_posterior_at(fam, prior, data, nodes, true);
    const double parallel_ms = ms_since(t0);
    return {name, nodes.size(), serial_ms, parallel_ms, serial == parallel};
}

Row bench_predictive(const Family& fam, const PriorSpec& prior, const Dataset& data,
                     const std::string& name) {
    FitSettings s;
    s.grid_nodes = 401;
    const ConditionalPosterior post = fit_conditional_posterior(fam, prior, data, s);
    auto t0 = Clock::now();
    const double serial = log_predictive_at_observed(fam, post, data, false);
    const double serial_ms = ms_since(t0);
    t0 = Clock::now();
    const double parallel = log_predictive_at_observed(fam, post, data, true);
    const double parallel_ms = ms_since(t0);
    return {name, post.nodes.size(), serial_ms, parallel_ms, serial == parallel};
}

Row bench_reps(std::size_t reps) {
    std::vector<ModelEntry> entries;
    entries.push_back({make_gamma_family(), 0.5,
                       {{prior_lognormal(0, 1.5), prior_lognormal(0, 1.5)}}});
    entries.push_back({make_lognormal_family(), 0.5,
                       {{prior_normal(0, 3), prior_lognormal(0, 1)}}});
    const PopulationSpaceModel model(std::move(entries));
    TrueDistSpec truth;
    truth.kind = TrueDistSpec::Kind::family;
    truth.family = make_gamma_family();
    truth.theta = ParamVector{2.0, 2.0};
    FitSettings s;
    s.grid_nodes = 101;
    const auto q = QuantitySpec::parse("mean");

    auto t0 = Clock::now();
    const auto serial = run_coverage_experiment(model, q, truth, 100, reps, 0.9, 11,
                                                s, false);
    const double serial_ms = ms_since(t0);
    t0 = Clock::now();
    const auto parallel = run_coverage_experiment(model, q, truth, 100, reps, 0.9, 11,
                                                  s, true);
    const double parallel_ms = ms_since(t0);
    bool identical = serial.rows.size() == parallel.rows.size();
    for (std::size_t r = 0; identical && r < serial.rows.size(); ++r) {
        identical = serial.rows[r].interval_lo == parallel.rows[r].interval_lo &&
                    serial.rows[r].interval_hi == parallel.rows[r].interval_hi &&
                    serial.rows[r].weights == parallel.rows[r].weights;
    }
    return {"simulation reps", reps, serial_ms, parallel_ms, identical};
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t reps = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 64;
    std::printf("threads: %d\n\n", thread_cap());
    std::printf("%-28s %10s %12s %12s %9s\n", "kernel", "items", "serial ms",
                "parallel ms", "speedup");

    const auto t_data = make_student_t_family(4.0)->sample({0.0, 1.0}, 2000, 1);
    const PriorSpec t_prior{{prior_normal(0, 5), prior_lognormal(0, 1)}};
    print_row(bench_surface(*make_student_t_family(4.0), t_prior, t_data,
                            "posterior surface (t, O(n))", 400, -2.0, 2.0, 0.05,
                            3.0));

    const auto g_data = make_gamma_family()->sample({2.0, 2.0}, 2000, 2);
    const PriorSpec g_prior{{prior_lognormal(0, 1.5), prior_lognormal(0, 1.5)}};
    print_row(bench_surface(*make_gamma_family(), g_prior, g_data,
                            "posterior surface (suffstat)", 400, 0.05, 4.0, 0.05,
                            3.0));

    print_row(bench_predictive(*make_student_t_family(4.0), t_prior, t_data,
                               "predictive at observed (t)"));

    print_row(bench_reps(reps));
    return 0;
}
