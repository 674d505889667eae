#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "openpop/diagnostics.hpp"
#include "openpop/errors.hpp"

using namespace openpop;
using namespace openpop::test;

namespace {

// cdf(theta, y) = theta[0] regardless of y: the two-sided p value at a node
// is then 2 min(theta, 1-theta), handy for weighted-average arithmetic.
struct PinnedCdfFamily final : Family {
    PinnedCdfFamily()
        : Family("pinned", "Pinned", {{"p", {0.0, 1.0, true, true}}}, "") {}
    double log_density(const ParamVector&, double) const override { return 0.0; }
    double cdf(const ParamVector& t, double) const override { return t[0]; }
    double quantile(const ParamVector&, double p) const override { return p; }
    Interval support(const ParamVector&) const override { return {kNegInf, kPosInf}; }
    Moments params_to_moments(const ParamVector& t) const override {
        return {t[0], 1.0};
    }
};

} // namespace

TEST_CASE("pointwise two-sided p values") {
    const auto unif = make_uniform_location_family(1.0);
    const double y = 1.0 - 1e-7;
    const double p = pointwise_pvalue(*unif, {0.0}, Dataset({y}),
                                      TestStatistic::obs_value);
    CHECK(p < 1e-6);
    CHECK(std::abs(p - 1e-7) < 1e-12);

    CHECK(pointwise_pvalue(*unif, {0.0}, Dataset({0.0}), TestStatistic::obs_value) ==
          1.0);

    const auto normal = make_normal_family();
    CHECK(pointwise_pvalue(*normal, {0.0, 1.0}, Dataset({1.96}),
                           TestStatistic::obs_value) ==
          doctest::Approx(0.04999579029644097).epsilon(1e-10));

    SUBCASE("monotone away from the median for a symmetric unimodal null") {
        double prev = 1.0;
        for (double y2 : {0.0, 0.3, 0.8, 1.5, 2.5, 4.0}) {
            const double pv = pointwise_pvalue(*normal, {0.0, 1.0}, Dataset({y2}),
                                               TestStatistic::obs_value);
            CHECK(pv <= prev + 1e-15);
            CHECK(pv >= 0.0);
            CHECK(pv <= 1.0);
            prev = pv;
        }
    }

    SUBCASE("obs_value needs a single observation") {
        CHECK_THROWS_AS((void)pointwise_pvalue(*normal, {0.0, 1.0},
                                               Dataset({1.0, 2.0}),
                                               TestStatistic::obs_value),
                        MisuseError);
    }

    SUBCASE("sample_mean uses the normal approximation with null moments") {
        const Dataset data({0.1, -0.2, 0.3, 0.05});
        const double pv = pointwise_pvalue(*normal, {0.0, 1.0}, data,
                                           TestStatistic::sample_mean);
        double mean = (0.1 - 0.2 + 0.3 + 0.05) / 4.0;
        const double z = mean / std::sqrt(1.0 / 4.0);
        const double want = 2.0 * (1.0 - 0.5 * std::erfc(-z / std::sqrt(2.0)));
        CHECK(pv == doctest::Approx(want).epsilon(1e-12));
    }

    SUBCASE("undefined null moments") {
        const auto t15 = make_student_t_family(1.5);
        CHECK_THROWS_AS((void)pointwise_pvalue(*t15, {0.0, 1.0}, Dataset({1.0, 2.0}),
                                               TestStatistic::sample_mean),
                        UndefinedStatisticError);
    }
}

TEST_CASE("weighted p value arithmetic") {
    const PinnedCdfFamily fam;
    const Dataset data({0.0});

    SUBCASE("two nodes, alpha (0.1, 0.5), weights (1, 3) -> 0.4") {
        const std::vector<ParamVector> nodes{ParamVector{0.05}, ParamVector{0.25}};
        const std::vector<double> w{1.0, 3.0};
        const auto rep = weighted_pvalue(fam, nodes, w, data, TestStatistic::obs_value);
        CHECK(std::abs(rep.lambda - 0.4) <= 1e-12);
        CHECK_NOTHROW(rep.validate());
    }
    SUBCASE("constant alpha is returned exactly") {
        const std::vector<ParamVector> nodes(7, ParamVector{0.15});  // alpha = 0.3
        const std::vector<double> w{0.3, 1.2, 0.01, 2.0, 0.5, 0.9, 4.0};
        const auto rep = weighted_pvalue(fam, nodes, w, data, TestStatistic::obs_value);
        CHECK(std::abs(rep.lambda - 0.3) <= 1e-12);
    }
    SUBCASE("invariant under positive rescaling of the weights") {
        const std::vector<ParamVector> nodes{ParamVector{0.05}, ParamVector{0.25},
                                             ParamVector{0.4}};
        const std::vector<double> w{0.2, 1.0, 2.5};
        std::vector<double> w2 = w;
        for (double& x : w2) x *= 7.3;
        const auto a = weighted_pvalue(fam, nodes, w, data, TestStatistic::obs_value);
        const auto b = weighted_pvalue(fam, nodes, w2, data, TestStatistic::obs_value);
        CHECK(std::abs(a.lambda - b.lambda) <= 1e-12);
        CHECK(a.lambda >= 0.0);
        CHECK(a.lambda <= 1.0);
    }
    SUBCASE("zero total weight is degenerate") {
        const std::vector<ParamVector> nodes{ParamVector{0.1}};
        const std::vector<double> w{0.0};
        CHECK_THROWS_AS(
            (void)weighted_pvalue(fam, nodes, w, data, TestStatistic::obs_value),
            DegenerateWeightError);
    }
}

TEST_CASE("posterior-weighted p value matches an independent quadrature") {
    const auto base = make_normal_family();
    const Dataset data = base->sample({0.0, 1.0}, 50, 0);
    const ConjugateOracle oracle(data, 0.0, 10.0);
    const auto fixed = fix_components(base, {{"sigma", 1.0}});
    const auto post = fit_conditional_posterior(
        *fixed, make_prior({cp_normal(0.0, 10.0)}), data);
    const auto rep = weighted_pvalue(*fixed, post, data, TestStatistic::sample_mean);
    CHECK(rep.lambda >= 0.0);
    CHECK(rep.lambda <= 1.0);
    CHECK_NOTHROW(rep.validate());

    // oracle: trapezoid quadrature of alpha(mu) against the closed-form
    // posterior density
    double mean = 0.0;
    for (double y : data.values()) mean += y;
    mean /= static_cast<double>(data.n());
    const double se = std::sqrt(1.0 / static_cast<double>(data.n()));
    auto alpha = [&](double mu) {
        const double z = (mean - mu) / se;
        const double f0 = 0.5 * std::erfc(-z / std::sqrt(2.0));
        return 2.0 * std::min(f0, 1.0 - f0);
    };
    const double sd = std::sqrt(oracle.post_var);
    const std::size_t n_grid = 20001;
    const double lo = oracle.post_mean - 10.0 * sd, hi = oracle.post_mean + 10.0 * sd;
    const double step = (hi - lo) / static_cast<double>(n_grid - 1);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n_grid; ++i) {
        const double mu = lo + step * static_cast<double>(i);
        const double w = ((i == 0 || i == n_grid - 1) ? 0.5 : 1.0) * oracle.density(mu);
        num += w * alpha(mu);
        den += w;
    }
    CHECK(std::abs(rep.lambda - num / den) < 1e-4);

    SUBCASE("posterior fitted to other data is rejected") {
        const Dataset other = base->sample({0.0, 1.0}, 50, 1);
        CHECK_THROWS_AS(
            (void)weighted_pvalue(*fixed, post, other, TestStatistic::sample_mean),
            MisuseError);
    }
}

TEST_CASE("uniform flat-likelihood demonstration") {
    SUBCASE("extreme-looking observation, maximal density") {
        const auto rec = uniform_demo(1.0, 1.0 - 1e-7, 0.5);
        CHECK(rec.p_two_sided < 1e-6);
        CHECK(std::abs(rec.p_two_sided - 1e-7) <= 1e-12);
        CHECK(rec.null_density_at_y == 0.5);
        CHECK(rec.max_density_height == 0.5);
        CHECK(rec.density_at_max_height);
        CHECK_FALSE(rec.support_excluded);
        CHECK(rec.max_likelihood_ratio == 1.0);
        for (double r : rec.likelihood_ratio) CHECK(r <= 1.0);
    }
    SUBCASE("central observation") {
        const auto rec = uniform_demo(1.0, 0.0, 0.5);
        CHECK(rec.p_two_sided == 1.0);
        CHECK(rec.null_density_at_y == 0.5);
    }
    SUBCASE("flat likelihood ratio never exceeds one on the grid") {
        const auto rec = uniform_demo(1.0, 0.5, 0.5, 81, 2.0);
        CHECK(rec.max_likelihood_ratio == 1.0);
        for (double r : rec.likelihood_ratio) {
            CHECK(r <= 1.0);
            CHECK(r >= 0.0);
        }
    }
    SUBCASE("observation outside the null support") {
        const auto rec = uniform_demo(1.0, 1.5, 0.5);
        CHECK(rec.support_excluded);
        CHECK(rec.p_two_sided == 0.0);
        CHECK(rec.null_density_at_y == 0.0);
        CHECK_FALSE(rec.density_at_max_height);
    }
    SUBCASE("bad inputs") {
        CHECK_THROWS_AS((void)uniform_demo(-1.0, 0.0, 0.5), ConfigError);
        CHECK_THROWS_AS((void)uniform_demo(1.0, 0.0, 0.0), ConfigError);
    }
}

TEST_CASE("ks distance between discrete laws") {
    const QuantityLaw a({0.0}, {1.0});
    const QuantityLaw b({0.0, 1.0}, {0.5, 0.5});
    CHECK(ks_distance(a, b) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ks_distance(b, a) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ks_distance(a, a) == 0.0);
    const QuantityLaw c({5.0}, {1.0});
    CHECK(ks_distance(a, c) == 1.0);

    // unnormalized masses normalize internally
    const QuantityLaw b2({0.0, 1.0}, {1.0, 1.0});
    CHECK(ks_distance(b, b2) == 0.0);
}

TEST_CASE("overlap coefficient") {
    const QuantityLaw a({0.0, 0.1, 0.2, 0.3}, {0.25, 0.25, 0.25, 0.25});
    const QuantityLaw far({10.0, 10.1}, {0.5, 0.5});
    CHECK(overlap_coefficient(a, a) > 0.95);
    CHECK(overlap_coefficient(a, far) < 0.05);
    const double o = overlap_coefficient(a, far);
    CHECK(o >= 0.0);
    CHECK(o <= 1.0);
}

namespace {

PopulationSpaceModel sensitivity_model() {
    std::vector<ModelEntry> entries;
    entries.push_back({make_lognormal_family(), 0.5,
                       make_prior({cp_normal(0, 3), cp_lognormal(0, 1)})});
    entries.push_back({make_gamma_family(), 0.5,
                       make_prior({cp_lognormal(0, 1.5), cp_lognormal(0, 1.5)})});
    return PopulationSpaceModel(std::move(entries));
}

} // namespace

TEST_CASE("sensitivity: self-comparison is exactly adequate") {
    const auto model = sensitivity_model();
    const Dataset data = make_lognormal_family()->sample({0.0, 0.5}, 50, 4);
    const PriorSpec mv_prior =
        make_prior({cp_lognormal(0.0, 1.5), cp_lognormal(0.0, 1.5)});
    FitSettings s;
    s.grid_nodes = 101;
    const auto rep = sensitivity_compare(model, "lognormal", "lognormal",
                                         QuantitySpec::parse("mean"), data, mv_prior,
                                         0.1, s);
    CHECK(rep.ks_distance == 0.0);
    CHECK_FALSE(rep.enlarge_model);
    CHECK(rep.joint_sup_abs == 0.0);
}

TEST_CASE("sensitivity: lognormal vs gamma, mean is CLT-stable, far tail is not") {
    const auto model = sensitivity_model();
    const Dataset data = make_lognormal_family()->sample({0.0, 0.5}, 200, 1);
    const PriorSpec mv_prior =
        make_prior({cp_lognormal(0.0, 1.5), cp_lognormal(0.0, 1.5)});
    FitSettings s;
    s.grid_nodes = 201;
    const auto mean_rep = sensitivity_compare(model, "lognormal", "gamma",
                                              QuantitySpec::parse("mean"), data,
                                              mv_prior, 0.1, s);
    const auto tail_rep = sensitivity_compare(model, "lognormal", "gamma",
                                              QuantitySpec::parse("quantile:0.99"),
                                              data, mv_prior, 0.1, s);
    CHECK(mean_rep.ks_distance < 0.1);
    CHECK_FALSE(mean_rep.enlarge_model);
    CHECK(tail_rep.ks_distance > mean_rep.ks_distance);
    CHECK(mean_rep.ks_distance >= 0.0);
    CHECK(tail_rep.ks_distance <= 1.0);
    CHECK(mean_rep.overlap_coefficient >= 0.0);
    CHECK(mean_rep.overlap_coefficient <= 1.0);
    CHECK(tail_rep.suggested_config.find("gamma") != std::string::npos);
    // symmetry of the distance
    const auto swapped = sensitivity_compare(model, "gamma", "lognormal",
                                             QuantitySpec::parse("mean"), data,
                                             mv_prior, 0.1, s);
    CHECK(swapped.ks_distance == doctest::Approx(mean_rep.ks_distance).epsilon(1e-12));
}

TEST_CASE("sensitivity: families without a moment parametrization are rejected") {
    std::vector<ModelEntry> entries;
    entries.push_back({make_uniform_location_family(1.0), 0.5,
                       make_prior({cp_uniform(-2, 2)})});
    entries.push_back({make_normal_family(), 0.5,
                       make_prior({cp_normal(0, 10), cp_lognormal(0, 1)})});
    const PopulationSpaceModel model(std::move(entries));
    const Dataset data({0.1, 0.2, -0.3});
    const PriorSpec mv_prior = make_prior({cp_normal(0, 5), cp_lognormal(0, 1)});
    CHECK_THROWS_AS(
        (void)sensitivity_compare(model, "uniform_loc", "normal",
                                  QuantitySpec::parse("mean"), data, mv_prior, 0.1),
        UnsupportedComparisonError);
}
