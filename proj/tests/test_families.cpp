#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "helpers.hpp"
#include "openpop/errors.hpp"
#include "openpop/families.hpp"

using namespace openpop;

namespace {

double integrate_density(const Family& fam, const ParamVector& theta) {
    const Interval s = fam.support(theta);
    double err = 0.0;
    if (s.lo == 0.0 && s.hi == kPosInf) {
        // integrate in log space; removes the possible endpoint singularity
        auto g = [&](double t) {
            const double y = std::exp(t);
            if (!std::isfinite(y) || y <= 0.0) return 0.0;
            const double ld = fam.log_density(theta, y);
            return ld == kNegInf ? 0.0 : std::exp(ld + t);
        };
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            g, kNegInf, kPosInf, 12, 1e-10, &err);
    }
    auto f = [&](double y) {
        const double ld = fam.log_density(theta, y);
        return ld == kNegInf ? 0.0 : std::exp(ld);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, s.lo, s.hi, 12, 1e-10, &err);
}

struct RandomTheta {
    std::mt19937 eng{20240815};
    double uni(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng);
    }
};

} // namespace

TEST_CASE("log_density matches closed forms") {
    const auto normal = make_normal_family();
    CHECK(normal->log_density({0.0, 1.0}, 0.0) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-14));

    const auto unif = make_uniform_location_family(1.0);
    CHECK(unif->log_density({0.0}, 0.5) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-14));
    CHECK(unif->log_density({0.0}, 1.5) == kNegInf);

    const auto gamma = make_gamma_family();
    CHECK(gamma->log_density({1.0, 2.0}, 3.0) ==
          doctest::Approx(-2.1931471805599454).epsilon(1e-14));
    CHECK(gamma->log_density({1.0, 2.0}, -0.5) == kNegInf);

    // cross-checks against an independent implementation (scipy), frozen
    CHECK(gamma->log_density({2.5, 1.5}, 3.0) ==
          doctest::Approx(-1.6504272077411657).epsilon(1e-12));
    const auto lognormal = make_lognormal_family();
    CHECK(lognormal->log_density({0.3, 0.8}, 2.0) ==
          doctest::Approx(-1.509695838686529).epsilon(1e-12));
    const auto t4 = make_student_t_family(4.0);
    CHECK(t4->log_density({1.0, 2.0}, 0.5) ==
          doctest::Approx(-1.7127368999115844).epsilon(1e-12));
}

TEST_CASE("cdf and quantile closed forms") {
    const auto normal = make_normal_family();
    CHECK(normal->quantile({0.0, 1.0}, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(normal->quantile({0.0, 1.0}, 0.975) ==
          doctest::Approx(1.959963984540054).epsilon(1e-12));

    const auto unif = make_uniform_location_family(1.0);
    CHECK(unif->cdf({0.0}, 0.5) == doctest::Approx(0.75).epsilon(1e-15));

    const auto lognormal = make_lognormal_family();
    CHECK(lognormal->cdf({0.0, 1.0}, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(lognormal->cdf({0.3, 0.8}, 2.0) ==
          doctest::Approx(0.6884402305450066).epsilon(1e-12));

    const auto gamma = make_gamma_family();
    CHECK(gamma->cdf({2.5, 1.5}, 3.0) ==
          doctest::Approx(0.4505840486472198).epsilon(1e-12));
    CHECK(gamma->quantile({2.5, 1.5}, 0.9) ==
          doctest::Approx(6.927267674835843).epsilon(1e-12));

    const auto t4 = make_student_t_family(4.0);
    CHECK(t4->cdf({0.0, 1.0}, 1.1) ==
          doctest::Approx(0.8334581752262229).epsilon(1e-12));
    CHECK(t4->quantile({1.0, 2.0}, 0.3) ==
          doctest::Approx(-0.13729812607710468).epsilon(1e-10));

    CHECK_THROWS_AS((void)normal->quantile({0.0, 1.0}, 0.0), Error);
    CHECK_THROWS_AS((void)normal->quantile({0.0, 1.0}, 1.5), Error);
}

TEST_CASE("moment parametrization round trips") {
    const auto gamma = make_gamma_family();
    const ParamVector g = gamma->moments_to_params(2.0, 4.0);
    CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-14));

    const auto normal = make_normal_family();
    const ParamVector nn = normal->moments_to_params(3.0, 4.0);
    CHECK(nn[0] == 3.0);
    CHECK(nn[1] == 2.0);

    const auto lognormal = make_lognormal_family();
    const ParamVector ln = lognormal->moments_to_params(1.0, 1e-8);
    CHECK(std::abs(ln[0]) < 1e-3);  // meanlog -> 0 in the degenerate limit
    CHECK(ln[1] < 1e-3);            // sdlog -> 0
    CHECK(ln[1] > 0.0);

    CHECK_THROWS_AS((void)gamma->moments_to_params(-1.0, 4.0), MomentDomainError);
    CHECK_THROWS_AS((void)normal->moments_to_params(0.0, -1.0), MomentDomainError);

    RandomTheta rng;
    for (int it = 0; it < 200; ++it) {
        for (const auto& fam :
             {make_normal_family(), make_lognormal_family(), make_gamma_family(),
              make_student_t_family(4.5)}) {
            const double mean = fam->moment_domain().mean.lo >= 0.0
                                    ? rng.uni(0.2, 6.0)
                                    : rng.uni(-5.0, 5.0);
            const double var = rng.uni(0.05, 9.0);
            const ParamVector theta = fam->moments_to_params(mean, var);
            const Moments m = fam->params_to_moments(theta);
            CHECK(m.mean == doctest::Approx(mean).epsilon(1e-10));
            CHECK(m.variance == doctest::Approx(var).epsilon(1e-10));
        }
    }
}

TEST_CASE("uniform_loc moments are pinned by the half-width") {
    const auto unif = make_uniform_location_family(1.5);
    const Moments m = unif->params_to_moments({0.7});
    CHECK(m.mean == 0.7);
    CHECK(m.variance == doctest::Approx(0.75).epsilon(1e-15));
    const ParamVector back = unif->moments_to_params(0.7, 0.75);
    CHECK(back[0] == 0.7);
    CHECK_THROWS_AS((void)unif->moments_to_params(0.7, 0.9), MomentDomainError);
    CHECK(!unif->has_moment_parametrization());
}

TEST_CASE("student_t moments need enough dof") {
    const auto t15 = make_student_t_family(1.5);
    CHECK_THROWS_AS((void)t15->params_to_moments({0.0, 1.0}), UndefinedQuantityError);
    const auto t05 = make_student_t_family(0.5);
    CHECK_THROWS_AS((void)t05->params_to_moments({0.0, 1.0}), UndefinedQuantityError);
    CHECK(!t15->has_moment_parametrization());
    const auto t4 = make_student_t_family(4.0);
    const Moments m = t4->params_to_moments({1.0, 2.0});
    CHECK(m.mean == 1.0);
    CHECK(m.variance == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("densities integrate to 1 (independent quadrature oracle)") {
    RandomTheta rng;
    for (int it = 0; it < 8; ++it) {
        CHECK(integrate_density(*make_normal_family(),
                                {rng.uni(-5, 5), rng.uni(0.1, 3)}) ==
              doctest::Approx(1.0).epsilon(1e-6));
        CHECK(integrate_density(*make_lognormal_family(),
                                {rng.uni(-1, 1), rng.uni(0.2, 1.5)}) ==
              doctest::Approx(1.0).epsilon(1e-6));
        CHECK(integrate_density(*make_gamma_family(),
                                {rng.uni(0.3, 8), rng.uni(0.2, 4)}) ==
              doctest::Approx(1.0).epsilon(1e-6));
        CHECK(integrate_density(*make_uniform_location_family(1.7),
                                {rng.uni(-4, 4)}) ==
              doctest::Approx(1.0).epsilon(1e-6));
        CHECK(integrate_density(*make_student_t_family(4.5),
                                {rng.uni(-3, 3), rng.uni(0.3, 2.5)}) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("quantile inverts cdf on the support interior") {
    RandomTheta rng;
    for (int it = 0; it < 40; ++it) {
        const std::vector<std::pair<FamilyPtr, ParamVector>> cases{
            {make_normal_family(), {rng.uni(-5, 5), rng.uni(0.1, 3)}},
            {make_lognormal_family(), {rng.uni(-1, 1), rng.uni(0.2, 1.5)}},
            {make_gamma_family(), {rng.uni(0.5, 8), rng.uni(0.2, 4)}},
            {make_uniform_location_family(1.7), {rng.uni(-4, 4)}},
            {make_student_t_family(4.5), {rng.uni(-3, 3), rng.uni(0.3, 2.5)}},
        };
        for (const auto& [fam, theta] : cases) {
            const double u = rng.uni(0.01, 0.99);
            const double x = fam->quantile(theta, u);
            const double back = fam->quantile(theta, fam->cdf(theta, x));
            CHECK(back == doctest::Approx(x).epsilon(1e-8));
        }
    }
}

TEST_CASE("sampling is deterministic and lands where it should") {
    const auto normal = make_normal_family();
    const Dataset big = normal->sample({0.0, 1.0}, 100000, 7);
    double mean = 0.0;
    for (double y : big.values()) mean += y;
    mean /= static_cast<double>(big.n());
    CHECK(std::abs(mean) < 0.02);  // 3/sqrt(n) with slack

    const Dataset a = normal->sample({0.0, 1.0}, 1, 99);
    const Dataset b = normal->sample({0.0, 1.0}, 1, 99);
    CHECK(a.values()[0] == b.values()[0]);

    const auto unif = make_uniform_location_family(1.0);
    const Dataset u = unif->sample({0.0}, 10000, 5);
    for (double y : u.values()) {
        CHECK(y >= -1.0);
        CHECK(y <= 1.0);
    }

    const Dataset g1 = make_gamma_family()->sample({2.0, 2.0}, 256, 11);
    const Dataset g2 = make_gamma_family()->sample({2.0, 2.0}, 256, 11);
    CHECK(g1.values() == g2.values());  // bit-identical
}

TEST_CASE("bounds are enforced") {
    const auto normal = make_normal_family();
    CHECK_THROWS_AS((void)normal->log_density({0.0, -1.0}, 0.0), ParameterDomainError);
    CHECK_THROWS_AS((void)normal->log_density({0.0, 0.0}, 0.0), ParameterDomainError);
    CHECK_THROWS_AS((void)normal->log_density({0.0}, 0.0), ParameterDomainError);
    const double nan = std::nan("");
    CHECK_THROWS_AS((void)normal->log_density({nan, 1.0}, 0.0), ParameterDomainError);
}

TEST_CASE("sufficient-statistic evaluators match the generic sum") {
    RandomTheta rng;
    const Dataset pos = make_gamma_family()->sample({2.0, 1.5}, 64, 3);
    const Dataset real = make_normal_family()->sample({0.5, 2.0}, 64, 4);
    const std::vector<std::pair<FamilyPtr, const Dataset*>> cases{
        {make_normal_family(), &real},    {make_lognormal_family(), &pos},
        {make_gamma_family(), &pos},      {make_uniform_location_family(30.0), &real},
        {make_student_t_family(4.5), &real},
    };
    for (const auto& [fam, data] : cases) {
        const auto fast = fam->make_log_likelihood(*data);
        for (int it = 0; it < 20; ++it) {
            ParamVector theta;
            if (fam->id() == "uniform_loc") {
                theta = ParamVector{rng.uni(-3, 3)};
            } else if (fam->id() == "gamma") {
                theta = ParamVector{rng.uni(0.5, 6), rng.uni(0.3, 3)};
            } else {
                theta = ParamVector{rng.uni(-2, 2), rng.uni(0.3, 3)};
            }
            double slow = 0.0;
            bool inf = false;
            for (double y : data->values()) {
                const double ld = fam->log_density(theta, y);
                if (ld == kNegInf) {
                    inf = true;
                    break;
                }
                slow += ld;
            }
            const double got = (*fast)(theta);
            if (inf) {
                CHECK(got == kNegInf);
            } else {
                CHECK(got == doctest::Approx(slow).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("family registry resolves config ids") {
    CHECK(make_family("normal")->id() == "normal");
    CHECK(make_family("lognormal")->id() == "lognormal");
    CHECK(make_family("gamma")->id() == "gamma");
    CHECK(make_family("uniform_loc", {{"a", 2.0}})->id() == "uniform_loc");
    CHECK(make_family("student_t", {{"nu", 4.0}})->id() == "student_t");
    CHECK_THROWS_AS((void)make_family("weibull"), ConfigError);
    CHECK_THROWS_AS((void)make_family("uniform_loc"), ConfigError);
    CHECK_THROWS_AS((void)make_family("student_t", {{"nu", -1.0}}), ConfigError);
}

TEST_CASE("fixed-component view pins parameters") {
    const auto fixed = fix_components(make_normal_family(), {{"sigma", 1.0}});
    CHECK(fixed->dim() == 1);
    CHECK(fixed->components()[0].name == "mu");
    const auto full = make_normal_family();
    CHECK(fixed->log_density({0.3}, 1.1) == full->log_density({0.3, 1.0}, 1.1));
    CHECK(fixed->cdf({0.3}, 1.1) == full->cdf({0.3, 1.0}, 1.1));
    const Moments m = fixed->params_to_moments({0.3});
    CHECK(m.mean == 0.3);
    CHECK(m.variance == 1.0);
    // moments must agree with the pin
    const ParamVector back = fixed->moments_to_params(0.5, 1.0);
    CHECK(back[0] == 0.5);
    CHECK_THROWS_AS((void)fixed->moments_to_params(0.5, 2.0), MomentDomainError);
    CHECK_THROWS_AS((void)fix_components(make_normal_family(), {{"tau", 1.0}}),
                    ConfigError);
    CHECK_THROWS_AS(
        (void)fix_components(make_normal_family(), {{"mu", 0.0}, {"sigma", 1.0}}),
        ConfigError);
    CHECK_THROWS_AS((void)fix_components(make_normal_family(), {{"sigma", -2.0}}),
                    ParameterDomainError);
}

TEST_CASE("moment-parametrized view agrees with the base family") {
    const auto mv = moment_parametrized(make_lognormal_family());
    CHECK(mv->dim() == 2);
    CHECK(mv->components()[0].name == "mean");
    CHECK(mv->components()[1].name == "variance");
    const auto base = make_lognormal_family();
    const ParamVector theta = base->moments_to_params(1.3, 0.7);
    CHECK(mv->log_density({1.3, 0.7}, 2.0) ==
          doctest::Approx(base->log_density(theta, 2.0)).epsilon(1e-14));
    CHECK(mv->quantile({1.3, 0.7}, 0.9) ==
          doctest::Approx(base->quantile(theta, 0.9)).epsilon(1e-14));
    const Moments m = mv->params_to_moments({1.3, 0.7});
    CHECK(m.mean == 1.3);
    CHECK(m.variance == 0.7);
    CHECK_THROWS_AS((void)mv->log_density({-1.0, 0.7}, 2.0), ParameterDomainError);
    CHECK_THROWS_AS((void)moment_parametrized(make_uniform_location_family(1.0)),
                    UnsupportedComparisonError);
}

TEST_CASE("rename keeps behavior, changes only the id") {
    const auto renamed = rename_family(make_gamma_family(), "gamma2");
    CHECK(renamed->id() == "gamma2");
    CHECK(renamed->log_density({2.0, 1.0}, 1.0) ==
          make_gamma_family()->log_density({2.0, 1.0}, 1.0));
    const Dataset s1 = renamed->sample({2.0, 1.0}, 16, 9);
    const Dataset s2 = make_gamma_family()->sample({2.0, 1.0}, 16, 9);
    CHECK(s1.values() == s2.values());
}

TEST_CASE("dataset validation") {
    CHECK_THROWS_AS(Dataset(std::vector<double>{}), Error);
    CHECK_THROWS_AS(Dataset({1.0, std::nan("")}), Error);
    CHECK_THROWS_AS(Dataset({1.0, kPosInf}), Error);
    const Dataset d({1.0, 2.0});
    CHECK(d.n() == 2);
    CHECK(d.fingerprint() == Dataset({1.0, 2.0}).fingerprint());
    CHECK(d.fingerprint() != Dataset({1.0, 2.5}).fingerprint());
}
