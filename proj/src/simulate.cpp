#include "openpop/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "openpop/errors.hpp"
#include "openpop/parallel.hpp"
#include "openpop/pipeline.hpp"

namespace openpop {

namespace {

constexpr std::uint64_t kOracleSeed = 0xA11CE0FACULL;
constexpr std::size_t kOracleDraws = 10'000'000;

double std_normal_quantile(double p) {
    static const boost::math::normal_distribution<double> unit(0.0, 1.0);
    return boost::math::quantile(unit, p);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace

void TrueDistSpec::validate() const {
    switch (kind) {
        case Kind::family:
            if (!family) throw ConfigError("truth: family is required");
            family->require_in_bounds(theta);
            return;
        case Kind::normal_mixture: {
            const std::size_t m = mix_weights.size();
            if (m == 0 || mix_means.size() != m || mix_sds.size() != m) {
                throw ConfigError("truth: mixture weights/means/sds must align");
            }
            double sum = 0.0;
            for (double w : mix_weights) {
                if (!(w > 0.0)) throw ConfigError("truth: mixture weights must be positive");
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw ConfigError("truth: mixture weights must sum to 1");
            }
            for (double s : mix_sds) {
                if (!(s > 0.0)) throw ConfigError("truth: mixture sds must be positive");
            }
            return;
        }
        case Kind::contaminated:
            if (!base || !contaminant) {
                throw ConfigError("truth: contaminated needs base and contaminant");
            }
            base->require_in_bounds(base_theta);
            contaminant->require_in_bounds(contaminant_theta);
            if (!(fraction >= 0.0) || !(fraction < 1.0)) {
                throw ConfigError("truth: contamination fraction must lie in [0,1)");
            }
            return;
    }
    throw ConfigError("truth: unknown kind");
}

Dataset TrueDistSpec::sample(std::size_t n, std::uint64_t seed) const {
    validate();
    switch (kind) {
        case Kind::family:
            return family->sample(theta, n, seed);
        case Kind::normal_mixture: {
            std::mt19937_64 eng(seed);
            std::vector<double> out(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double u1 = canonical_u01(eng());
                const double u2 = canonical_u01(eng());
                double acc = 0.0;
                std::size_t c = mix_weights.size() - 1;
                for (std::size_t j = 0; j < mix_weights.size(); ++j) {
                    acc += mix_weights[j];
                    if (u1 <= acc) {
                        c = j;
                        break;
                    }
                }
                out[i] = mix_means[c] + mix_sds[c] * std_normal_quantile(u2);
            }
            return Dataset(std::move(out));
        }
        case Kind::contaminated: {
            std::mt19937_64 eng(seed);
            std::vector<double> out(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double u1 = canonical_u01(eng());
                const double u2 = canonical_u01(eng());
                out[i] = u1 < 1.0 - fraction
                             ? base->quantile(base_theta, u2)
                             : contaminant->quantile(contaminant_theta, u2);
            }
            return Dataset(std::move(out));
        }
    }
    throw ConfigError("truth: unknown kind");
}

bool TrueDistSpec::quantity_by_monte_carlo(const QuantitySpec& q) const {
    if (kind == Kind::contaminated) return true;
    if (kind == Kind::normal_mixture && q.kind == QuantitySpec::Kind::expectation_of &&
        q.integrand == "abs") {
        return true;
    }
    return false;
}

namespace {

double mixture_cdf(const TrueDistSpec& t, double x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < t.mix_weights.size(); ++j) {
        acc += t.mix_weights[j] * std_normal_cdf((x - t.mix_means[j]) / t.mix_sds[j]);
    }
    return acc;
}

double monte_carlo_quantity(const TrueDistSpec& t, const QuantitySpec& q) {
    const Dataset draws = t.sample(kOracleDraws, kOracleSeed);
    const auto& v = draws.values();
    switch (q.kind) {
        case QuantitySpec::Kind::mean:
        case QuantitySpec::Kind::variance:
        case QuantitySpec::Kind::sd: {
            double mean = 0.0;
            for (double y : v) mean += y;
            mean /= static_cast<double>(v.size());
            if (q.kind == QuantitySpec::Kind::mean) return mean;
            double ss = 0.0;
            for (double y : v) ss += (y - mean) * (y - mean);
            const double var = ss / static_cast<double>(v.size());
            return q.kind == QuantitySpec::Kind::variance ? var : std::sqrt(var);
        }
        case QuantitySpec::Kind::quantile: {
            std::vector<double> sorted = v;
            const auto idx = static_cast<std::size_t>(
                q.param * static_cast<double>(sorted.size() - 1));
            std::nth_element(sorted.begin(),
                             sorted.begin() + static_cast<std::ptrdiff_t>(idx),
                             sorted.end());
            return sorted[idx];
        }
        case QuantitySpec::Kind::tail_prob: {
            std::size_t c = 0;
            for (double y : v) c += y > q.param ? 1 : 0;
            return static_cast<double>(c) / static_cast<double>(v.size());
        }
        case QuantitySpec::Kind::expectation_of: {
            double acc = 0.0;
            for (double y : v) {
                acc += q.integrand == "identity" ? y
                       : q.integrand == "square" ? y * y
                                                 : std::abs(y);
            }
            return acc / static_cast<double>(v.size());
        }
    }
    throw Error("truth: unknown quantity");
}

} // namespace

double TrueDistSpec::true_quantity(const QuantitySpec& q) const {
    validate();
    if (quantity_by_monte_carlo(q)) return monte_carlo_quantity(*this, q);
    switch (kind) {
        case Kind::family:
            return quantity_value(*family, theta, q);
        case Kind::normal_mixture: {
            double mean = 0.0, second = 0.0;
            for (std::size_t j = 0; j < mix_weights.size(); ++j) {
                mean += mix_weights[j] * mix_means[j];
                second += mix_weights[j] *
                          (mix_means[j] * mix_means[j] + mix_sds[j] * mix_sds[j]);
            }
            const double var = second - mean * mean;
            switch (q.kind) {
                case QuantitySpec::Kind::mean: return mean;
                case QuantitySpec::Kind::variance: return var;
                case QuantitySpec::Kind::sd: return std::sqrt(var);
                case QuantitySpec::Kind::quantile: {
                    double lo = kPosInf, hi = kNegInf;
                    for (std::size_t j = 0; j < mix_weights.size(); ++j) {
                        lo = std::min(lo, mix_means[j] - 14.0 * mix_sds[j]);
                        hi = std::max(hi, mix_means[j] + 14.0 * mix_sds[j]);
                    }
                    const double p = q.param;
                    return bisect_root(
                        [&](double x) { return mixture_cdf(*this, x) - p; }, lo, hi,
                        1e-13);
                }
                case QuantitySpec::Kind::tail_prob:
                    return 1.0 - mixture_cdf(*this, q.param);
                case QuantitySpec::Kind::expectation_of:
                    if (q.integrand == "identity") return mean;
                    if (q.integrand == "square") return second;
                    return monte_carlo_quantity(*this, q);
            }
            throw Error("truth: unknown quantity");
        }
        case Kind::contaminated:
            return monte_carlo_quantity(*this, q);
    }
    throw Error("truth: unknown kind");
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

CoverageTable run_coverage_experiment(const PopulationSpaceModel& model,
                                      const QuantitySpec& q,
                                      const TrueDistSpec& truth, std::size_t n,
                                      std::size_t reps, double level,
                                      std::uint64_t seed,
                                      const FitSettings& settings, bool parallel) {
    if (reps == 0 || n == 0) {
        throw ConfigError("simulate: reps and n must be positive");
    }
    if (!(level > 0.0) || !(level < 1.0)) {
        throw ConfigError("simulate: level must lie in (0,1)");
    }
    truth.validate();

    CoverageTable table;
    table.level = level;
    table.n = n;
    table.reps = reps;
    table.true_value = truth.true_quantity(q);
    table.true_value_by_mc = truth.quantity_by_monte_carlo(q);
    table.rows.resize(reps);

    const std::size_t m = model.size();
    const double tail = 0.5 * (1.0 - level);

    auto body = [&](std::size_t r) {
        CoverageRow& row = table.rows[r];
        row.rep = r;
        row.weights.assign(m, 0.0);
        row.single_covered.assign(m, false);
        const Dataset data = truth.sample(n, derive_seed(seed, r));
        try {
            PipelineResult res = fit_and_weigh(model, data, settings, false);
            std::vector<ConditionalPosterior> posts;
            posts.reserve(m);
            for (auto& f : res.fits) posts.push_back(std::move(f.posterior));
            const MixturePosterior mix = mixture_posterior(model, res.weights, posts, q);
            const CredibleInterval ci = mix.interval(level);
            row.interval_lo = ci.lo;
            row.interval_hi = ci.hi;
            row.covered = ci.lo <= table.true_value && table.true_value <= ci.hi;
            row.weights = res.weights.weights;
            for (std::size_t i = 0; i < m; ++i) {
                if (res.weights.excluded_by_data[i]) continue; // method failed: not covered
                const QuantityLaw law =
                    family_quantity_posterior(*model.entry(i).family, posts[i], q);
                const double lo = law.quantile(tail);
                const double hi = law.quantile(1.0 - tail);
                row.single_covered[i] =
                    lo <= table.true_value && table.true_value <= hi;
            }
        } catch (const Error&) {
            row.degenerate = true;
        }
    };
    if (parallel) {
        parallel_for(static_cast<std::ptrdiff_t>(reps), body);
    } else {
        serial_for(static_cast<std::ptrdiff_t>(reps), body);
    }

    // Aggregation in rep order, serial.
    std::size_t ok = 0, covered = 0;
    std::vector<std::size_t> single(m, 0);
    table.mean_weights.assign(m, 0.0);
    for (const auto& row : table.rows) {
        if (row.degenerate) {
            ++table.degenerate_count;
            continue;
        }
        ++ok;
        covered += row.covered ? 1 : 0;
        for (std::size_t i = 0; i < m; ++i) {
            single[i] += row.single_covered[i] ? 1 : 0;
            table.mean_weights[i] += row.weights[i];
        }
    }
    table.single_coverage.assign(m, 0.0);
    table.single_se.assign(m, 0.0);
    if (ok > 0) {
        const double denom = static_cast<double>(ok);
        table.mixture_coverage = static_cast<double>(covered) / denom;
        table.mixture_se = std::sqrt(
            table.mixture_coverage * (1.0 - table.mixture_coverage) / denom);
        for (std::size_t i = 0; i < m; ++i) {
            table.single_coverage[i] = static_cast<double>(single[i]) / denom;
            table.single_se[i] = std::sqrt(table.single_coverage[i] *
                                           (1.0 - table.single_coverage[i]) / denom);
            table.mean_weights[i] /= denom;
        }
    }
    return table;
}

std::vector<WeightConcentrationRow> weight_concentration_experiment(
    const PopulationSpaceModel& model, const TrueDistSpec& truth,
    std::span<const std::size_t> n_schedule, std::size_t reps, std::uint64_t seed,
    const FitSettings& settings, bool parallel) {
    if (n_schedule.empty() || reps == 0) {
        throw ConfigError("simulate: schedule and reps must be nonempty");
    }
    truth.validate();
    const std::size_t m = model.size();

    std::vector<WeightConcentrationRow> out(n_schedule.size());
    for (std::size_t s = 0; s < n_schedule.size(); ++s) {
        WeightConcentrationRow& row = out[s];
        row.n = n_schedule[s];
        std::vector<std::vector<double>> weights(reps);
        std::vector<char> degenerate(reps, 0);
        auto body = [&](std::size_t r) {
            const Dataset data =
                truth.sample(row.n, derive_seed(seed, s * reps + r));
            try {
                const PipelineResult res = fit_and_weigh(model, data, settings, false);
                weights[r] = res.weights.weights;
            } catch (const Error&) {
                degenerate[r] = 1;
            }
        };
        if (parallel) {
            parallel_for(static_cast<std::ptrdiff_t>(reps), body);
        } else {
            serial_for(static_cast<std::ptrdiff_t>(reps), body);
        }
        row.mean_weights.assign(m, 0.0);
        std::size_t ok = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            if (degenerate[r]) {
                ++row.degenerate_count;
                continue;
            }
            ++ok;
            for (std::size_t i = 0; i < m; ++i) row.mean_weights[i] += weights[r][i];
        }
        if (ok > 0) {
            for (double& w : row.mean_weights) w /= static_cast<double>(ok);
        }
    }
    return out;
}

} // namespace openpop
