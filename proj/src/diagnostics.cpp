#include "openpop/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "openpop/errors.hpp"
#include "openpop/numerics.hpp"
#include "openpop/parallel.hpp"

namespace openpop {

std::string to_string(TestStatistic s) {
    return s == TestStatistic::obs_value ? "obs_value" : "sample_mean";
}

TestStatistic parse_statistic(const std::string& text) {
    if (text == "obs_value") return TestStatistic::obs_value;
    if (text == "sample_mean") return TestStatistic::sample_mean;
    throw ConfigError("statistic: expected obs_value or sample_mean, got '" + text + "'");
}

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double two_sided(double f0) {
    const double p = 2.0 * std::min(f0, 1.0 - f0);
    return std::clamp(p, 0.0, 1.0);
}

} // namespace

double pointwise_pvalue(const Family& family, const ParamVector& theta0,
                        const Dataset& data, TestStatistic statistic) {
    family.require_in_bounds(theta0);
    switch (statistic) {
        case TestStatistic::obs_value: {
            if (data.n() != 1) {
                throw MisuseError(
                    "pointwise_pvalue: obs_value statistic needs a single observation");
            }
            return two_sided(family.cdf(theta0, data.values()[0]));
        }
        case TestStatistic::sample_mean: {
            Moments m;
            try {
                m = family.params_to_moments(theta0);
            } catch (const UndefinedQuantityError& e) {
                throw UndefinedStatisticError(std::string("pointwise_pvalue: ") + e.what());
            }
            double mean = 0.0;
            for (double y : data.values()) mean += y;
            mean /= static_cast<double>(data.n());
            const double se = std::sqrt(m.variance / static_cast<double>(data.n()));
            if (!(se > 0.0)) {
                throw UndefinedStatisticError("pointwise_pvalue: zero null variance");
            }
            return two_sided(std_normal_cdf((mean - m.mean) / se));
        }
    }
    throw Error("pointwise_pvalue: unknown statistic");
}

void PValueReport::validate() const {
    if (nodes.size() != alphas.size() || nodes.size() != weights.size()) {
        throw MisuseError("p-value report: table sizes disagree");
    }
    const double total = compensated_sum(weights);
    if (!(total > 0.0)) throw MisuseError("p-value report: zero total weight");
    const double recomputed = compensated_dot(alphas, weights) / total;
    if (std::abs(recomputed - lambda) > 1e-12) {
        throw MisuseError("p-value report: lambda disagrees with its own table");
    }
}

PValueReport weighted_pvalue(const Family& family,
                             const std::vector<ParamVector>& nodes,
                             std::span<const double> weights, const Dataset& data,
                             TestStatistic statistic) {
    if (nodes.empty() || nodes.size() != weights.size()) {
        throw MisuseError("weighted_pvalue: nodes and weights must align");
    }
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw MisuseError("weighted_pvalue: weights must be finite and nonnegative");
        }
    }
    const double total = compensated_sum(weights);
    if (!(total > 0.0)) {
        throw DegenerateWeightError("weighted_pvalue: zero total weight");
    }

    PValueReport report;
    report.statistic = statistic;
    report.nodes = nodes;
    report.weights.assign(weights.begin(), weights.end());
    report.alphas.resize(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        report.alphas[k] = pointwise_pvalue(family, nodes[k], data, statistic);
    }
    report.lambda = compensated_dot(report.alphas, report.weights) / total;
    return report;
}

PValueReport weighted_pvalue(const Family& family,
                             const ConditionalPosterior& posterior,
                             const Dataset& data, TestStatistic statistic) {
    if (posterior.data_fingerprint != data.fingerprint()) {
        throw MisuseError("weighted_pvalue: posterior was fitted to a different dataset");
    }
    return weighted_pvalue(family, posterior.nodes, posterior.masses, data, statistic);
}

// ---------------------------------------------------------------------------
// Flat-likelihood demonstration
// ---------------------------------------------------------------------------

UniformDemoRecord uniform_demo(double half_width, double y, double prior_null_prob,
                               int theta_grid_points, double theta_span) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw ConfigError("uniform_demo: half-width must be positive");
    }
    if (!(prior_null_prob > 0.0) || !(prior_null_prob < 1.0)) {
        throw ConfigError("uniform_demo: prior null probability must lie in (0,1)");
    }
    if (theta_grid_points < 2) theta_grid_points = 2;

    UniformDemoRecord rec;
    rec.half_width = half_width;
    rec.y = y;
    rec.prior_null_prob = prior_null_prob;
    // The family density is flat at 1/(2a) on its support, so the maximum
    // height and any in-support height are the same number.
    rec.max_density_height = 1.0 / (2.0 * half_width);

    const bool inside = std::abs(y) <= half_width;
    rec.support_excluded = !inside;
    if (inside) {
        const double f0 = (y + half_width) / (2.0 * half_width);
        rec.p_two_sided = two_sided(f0);
        rec.null_density_at_y = rec.max_density_height;
        rec.density_at_max_height = true;
    } else {
        rec.p_two_sided = 0.0;
        rec.null_density_at_y = 0.0;
        rec.density_at_max_height = false;
    }

    rec.theta_grid.resize(static_cast<std::size_t>(theta_grid_points));
    rec.likelihood_ratio.resize(rec.theta_grid.size());
    const double step = 2.0 * theta_span / static_cast<double>(theta_grid_points - 1);
    rec.max_likelihood_ratio = 0.0;
    for (std::size_t k = 0; k < rec.theta_grid.size(); ++k) {
        const double theta = -theta_span + step * static_cast<double>(k);
        rec.theta_grid[k] = theta;
        // Flat likelihood: every theta whose support contains y attains the
        // common maximum, so the ratio is the support indicator.
        rec.likelihood_ratio[k] = std::abs(y - theta) <= half_width ? 1.0 : 0.0;
        rec.max_likelihood_ratio = std::max(rec.max_likelihood_ratio,
                                            rec.likelihood_ratio[k]);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Sensitivity comparison
// ---------------------------------------------------------------------------

double ks_distance(const QuantityLaw& a, const QuantityLaw& b) {
    if (a.size() == 0 || b.size() == 0) {
        throw MisuseError("ks_distance: empty law");
    }
    const double ta = a.total_mass();
    const double tb = b.total_mass();
    std::size_t ia = 0, ib = 0;
    double fa = 0.0, fb = 0.0, d = 0.0;
    while (ia < a.size() || ib < b.size()) {
        double v;
        if (ib >= b.size() || (ia < a.size() && a.values()[ia] <= b.values()[ib])) {
            v = a.values()[ia];
        } else {
            v = b.values()[ib];
        }
        while (ia < a.size() && a.values()[ia] <= v) fa += a.masses()[ia++];
        while (ib < b.size() && b.values()[ib] <= v) fb += b.masses()[ib++];
        d = std::max(d, std::abs(fa / ta - fb / tb));
    }
    return std::min(d, 1.0);
}

double overlap_coefficient(const QuantityLaw& a, const QuantityLaw& b,
                           std::size_t grid_points) {
    if (grid_points < 2) grid_points = 2;
    const double pad = 3.0 * std::max(silverman_bandwidth(a), silverman_bandwidth(b));
    const double lo = std::min(a.values().front(), b.values().front()) - pad;
    const double hi = std::max(a.values().back(), b.values().back()) + pad;
    std::vector<double> grid(grid_points);
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    for (std::size_t j = 0; j < grid_points; ++j) {
        grid[j] = lo + step * static_cast<double>(j);
    }
    const std::vector<double> fa = smoothed_density(a, grid);
    const std::vector<double> fb = smoothed_density(b, grid);
    double acc = 0.0;
    for (std::size_t j = 0; j < grid_points; ++j) {
        acc += std::min(fa[j] / a.total_mass(), fb[j] / b.total_mass());
    }
    return std::clamp(acc * step, 0.0, 1.0);
}

namespace {

FamilyPtr resolve_comparison_family(const PopulationSpaceModel& model,
                                    const std::string& id) {
    const std::ptrdiff_t idx = model.index_of(id);
    if (idx >= 0) return model.entry(static_cast<std::size_t>(idx)).family;
    return make_family(id); // shipped family with no instance constants
}

} // namespace

SensitivityReport sensitivity_compare(const PopulationSpaceModel& model,
                                      const std::string& family_i,
                                      const std::string& family_istar,
                                      const QuantitySpec& q, const Dataset& data,
                                      const PriorSpec& moment_prior,
                                      double threshold,
                                      const FitSettings& settings) {
    if (!(threshold > 0.0)) {
        throw ConfigError("sensitivity: threshold must be positive");
    }
    const FamilyPtr base_i = resolve_comparison_family(model, family_i);
    const FamilyPtr base_star = resolve_comparison_family(model, family_istar);

    // Matched parametrization: both posteriors live on (mean, variance) under
    // one shared prior.
    const FamilyPtr mv_i = moment_parametrized(base_i);
    const FamilyPtr mv_star = moment_parametrized(base_star);
    validate_prior_for(*mv_i, moment_prior);
    validate_prior_for(*mv_star, moment_prior);

    const ConditionalPosterior post_i =
        fit_conditional_posterior(*mv_i, moment_prior, data, settings);
    const ConditionalPosterior post_star =
        fit_conditional_posterior(*mv_star, moment_prior, data, settings);

    const QuantityLaw law_i = family_quantity_posterior(*mv_i, post_i, q);
    const QuantityLaw law_star = family_quantity_posterior(*mv_star, post_star, q);

    SensitivityReport rep;
    rep.family_i = family_i;
    rep.family_istar = family_istar;
    rep.quantity = q;
    rep.threshold = threshold;
    rep.ks_distance = ks_distance(law_i, law_star);
    rep.overlap_coefficient = overlap_coefficient(law_i, law_star);
    rep.enlarge_model = rep.ks_distance > threshold;

    // Joint posterior heights on a shared (mean, variance) grid.
    {
        double m_lo = kPosInf, m_hi = kNegInf, v_lo = kPosInf, v_hi = kNegInf;
        for (const auto* post : {&post_i, &post_star}) {
            for (const auto& node : post->nodes) {
                m_lo = std::min(m_lo, node[0]);
                m_hi = std::max(m_hi, node[0]);
                v_lo = std::min(v_lo, node[1]);
                v_hi = std::max(v_hi, node[1]);
            }
        }
        constexpr int kSide = 61;
        std::vector<ParamVector> shared;
        shared.reserve(kSide * kSide);
        const bool mean_positive = mv_i->components()[0].bound.lo >= 0.0 ||
                                   mv_star->components()[0].bound.lo >= 0.0;
        auto axis_nodes = [&](double lo, double hi, bool log_scale) {
            std::vector<double> xs(kSide);
            if (log_scale) {
                const double llo = std::log(lo), lhi = std::log(hi);
                for (int i = 0; i < kSide; ++i) {
                    xs[static_cast<std::size_t>(i)] =
                        std::exp(llo + (lhi - llo) * i / (kSide - 1));
                }
            } else {
                for (int i = 0; i < kSide; ++i) {
                    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (kSide - 1);
                }
            }
            return xs;
        };
        const auto ms = axis_nodes(m_lo, m_hi, mean_positive && m_lo > 0.0);
        const auto vs = axis_nodes(v_lo, v_hi, v_lo > 0.0);
        for (double mv : ms) {
            for (double vv : vs) shared.push_back(ParamVector{mv, vv});
        }
        const auto lp_i = log_posterior_at(*mv_i, moment_prior, data, shared);
        const auto lp_star = log_posterior_at(*mv_star, moment_prior, data, shared);
        double sup = 0.0, peak = 0.0;
        for (std::size_t k = 0; k < shared.size(); ++k) {
            const double di =
                lp_i[k] == kNegInf
                    ? 0.0
                    : std::exp(lp_i[k] - post_i.log_normalizing_constant);
            const double ds =
                lp_star[k] == kNegInf
                    ? 0.0
                    : std::exp(lp_star[k] - post_star.log_normalizing_constant);
            sup = std::max(sup, std::abs(di - ds));
            peak = std::max({peak, di, ds});
        }
        rep.joint_sup_abs = sup;
        rep.joint_sup_rel = peak > 0.0 ? sup / peak : 0.0;
    }

    std::ostringstream stanza;
    stanza << "{\"family\": \"" << base_star->id()
           << "\", \"prior_weight\": \"<split off part of the weight of '" << family_i
           << "'>\", \"prior\": \"<specify conditional prior>\"}";
    rep.suggested_config = stanza.str();
    return rep;
}

} // namespace openpop
