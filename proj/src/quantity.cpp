#include "openpop/quantity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "openpop/errors.hpp"

namespace openpop {

// ---------------------------------------------------------------------------
// QuantitySpec
// ---------------------------------------------------------------------------

QuantitySpec QuantitySpec::parse(const std::string& text) {
    QuantitySpec q;
    if (text == "mean") {
        q.kind = Kind::mean;
        return q;
    }
    if (text == "variance") {
        q.kind = Kind::variance;
        return q;
    }
    if (text == "sd") {
        q.kind = Kind::sd;
        return q;
    }
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string head = text.substr(0, colon);
        const std::string tail = text.substr(colon + 1);
        if (head == "quantile") {
            try {
                q.param = std::stod(tail);
            } catch (const std::exception&) {
                throw ConfigError("quantity: bad quantile level '" + tail + "'");
            }
            if (!(q.param > 0.0) || !(q.param < 1.0)) {
                throw ConfigError("quantity: quantile level must lie in (0,1)");
            }
            q.kind = Kind::quantile;
            return q;
        }
        if (head == "tailprob") {
            try {
                q.param = std::stod(tail);
            } catch (const std::exception&) {
                throw ConfigError("quantity: bad tail threshold '" + tail + "'");
            }
            if (!std::isfinite(q.param)) {
                throw ConfigError("quantity: tail threshold must be finite");
            }
            q.kind = Kind::tail_prob;
            return q;
        }
        if (head == "expect") {
            if (tail != "identity" && tail != "square" && tail != "abs") {
                throw ConfigError("quantity: unknown integrand '" + tail +
                                  "' (expected identity|square|abs)");
            }
            q.kind = Kind::expectation_of;
            q.integrand = tail;
            return q;
        }
    }
    throw ConfigError("quantity: cannot parse '" + text +
                      "' (expected mean|variance|sd|quantile:<p>|tailprob:<t>|expect:<fn>)");
}

std::string QuantitySpec::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::mean: return "mean";
        case Kind::variance: return "variance";
        case Kind::sd: return "sd";
        case Kind::quantile:
            os << "quantile:" << param;
            return os.str();
        case Kind::tail_prob:
            os << "tailprob:" << param;
            return os.str();
        case Kind::expectation_of: return "expect:" + integrand;
    }
    return "?";
}

// ---------------------------------------------------------------------------
// quantity_value
// ---------------------------------------------------------------------------

namespace {

double expectation_by_quadrature(const Family& family, const ParamVector& theta,
                                 const std::string& integrand) {
    auto q_fn = [&](double y) -> double {
        if (integrand == "identity") return y;
        if (integrand == "square") return y * y;
        return std::abs(y);
    };
    const Interval sup = family.support(theta);
    auto f = [&](double y) {
        const double ld = family.log_density(theta, y);
        return ld == kNegInf ? 0.0 : q_fn(y) * std::exp(ld);
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, sup.lo, sup.hi, 8, 1e-10, &err);
}

} // namespace

double quantity_value(const Family& family, const ParamVector& theta,
                      const QuantitySpec& q) {
    family.require_in_bounds(theta);
    switch (q.kind) {
        case QuantitySpec::Kind::mean:
            return family.params_to_moments(theta).mean;
        case QuantitySpec::Kind::variance:
            return family.params_to_moments(theta).variance;
        case QuantitySpec::Kind::sd:
            return std::sqrt(family.params_to_moments(theta).variance);
        case QuantitySpec::Kind::quantile:
            if (!(q.param > 0.0) || !(q.param < 1.0)) {
                throw ConfigError("quantity: quantile level must lie in (0,1)");
            }
            return family.quantile(theta, q.param);
        case QuantitySpec::Kind::tail_prob:
            return 1.0 - family.cdf(theta, q.param);
        case QuantitySpec::Kind::expectation_of:
            if (q.integrand == "identity") return family.params_to_moments(theta).mean;
            if (q.integrand == "square") {
                const Moments m = family.params_to_moments(theta);
                return m.variance + m.mean * m.mean;
            }
            return expectation_by_quadrature(family, theta, q.integrand);
    }
    throw Error("quantity: unknown kind");
}

// ---------------------------------------------------------------------------
// QuantityLaw
// ---------------------------------------------------------------------------

QuantityLaw::QuantityLaw(std::vector<double> values, std::vector<double> masses) {
    if (values.size() != masses.size()) {
        throw MisuseError("quantity law: value/mass size mismatch");
    }
    for (double m : masses) {
        if (!(m >= 0.0)) throw MisuseError("quantity law: negative mass");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b; // deterministic for ties
    });
    values_.reserve(values.size());
    masses_.reserve(values.size());
    for (std::size_t i : order) {
        values_.push_back(values[i]);
        masses_.push_back(masses[i]);
    }
    cum_.resize(masses_.size());
    double c = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < masses_.size(); ++i) {
        // compensated running sum keeps long grids accurate
        const double v = masses_[i];
        const double t = c + v;
        comp += (std::abs(c) >= std::abs(v)) ? (c - t) + v : (v - t) + c;
        c = t;
        cum_[i] = c + comp;
    }
}

double QuantityLaw::total_mass() const { return cum_.empty() ? 0.0 : cum_.back(); }

double QuantityLaw::mean() const {
    const double total = total_mass();
    if (!(total > 0.0)) throw MisuseError("quantity law: zero total mass");
    return compensated_dot(values_, masses_) / total;
}

double QuantityLaw::cdf(double q) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), q);
    if (it == values_.begin()) return 0.0;
    const std::size_t idx = static_cast<std::size_t>(it - values_.begin()) - 1;
    return cum_[idx];
}

double QuantityLaw::quantile(double p) const {
    if (values_.empty()) throw MisuseError("quantity law: empty");
    if (!(p > 0.0) || !(p < 1.0)) {
        throw Error("quantity law: quantile level must lie in (0,1)");
    }
    const double total = total_mass();
    const double target = p * total;
    // left-continuous generalized inverse
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), target - 1e-12 * total);
    if (it == cum_.end()) return values_.back();
    const std::size_t idx = static_cast<std::size_t>(it - cum_.begin());
    // exact hit on an atom boundary: break the tie toward the midpoint
    if (std::abs(cum_[idx] - target) <= 1e-12 * total && idx + 1 < values_.size()) {
        return 0.5 * (values_[idx] + values_[idx + 1]);
    }
    return values_[idx];
}

// ---------------------------------------------------------------------------
// Pushforward and mixture
// ---------------------------------------------------------------------------

QuantityLaw family_quantity_posterior(const Family& family,
                                      const ConditionalPosterior& posterior,
                                      const QuantitySpec& q) {
    if (posterior.nodes.empty()) {
        throw MisuseError(family.id() + ": empty posterior");
    }
    std::vector<double> values(posterior.nodes.size());
    for (std::size_t k = 0; k < posterior.nodes.size(); ++k) {
        values[k] = quantity_value(family, posterior.nodes[k], q);
    }
    return QuantityLaw(std::move(values), posterior.masses);
}

MixturePosterior::MixturePosterior(std::vector<double> weights,
                                   std::vector<QuantityLaw> per_family,
                                   QuantitySpec q)
    : weights_(std::move(weights)),
      per_family_(std::move(per_family)),
      quantity_(std::move(q)) {
    if (weights_.size() != per_family_.size()) {
        throw MisuseError("mixture: weight/law size mismatch");
    }
    std::size_t total_atoms = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] > 0.0) total_atoms += per_family_[i].size();
    }
    if (total_atoms == 0) {
        throw MisuseError("mixture: no family carries positive weight");
    }
    std::vector<double> values, masses;
    values.reserve(total_atoms);
    masses.reserve(total_atoms);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] > 0.0)) continue;
        const auto& law = per_family_[i];
        for (std::size_t k = 0; k < law.size(); ++k) {
            values.push_back(law.values()[k]);
            masses.push_back(weights_[i] * law.masses()[k]);
        }
    }
    combined_ = QuantityLaw(std::move(values), std::move(masses));
    if (std::abs(combined_.total_mass() - 1.0) > 1e-10) {
        throw MisuseError("mixture: combined mass is not 1");
    }
}

CredibleInterval MixturePosterior::interval(double level) const {
    if (!(level > 0.0) || !(level < 1.0)) {
        throw Error("interval level must lie in (0,1)");
    }
    const double tail = 0.5 * (1.0 - level);
    return {combined_.quantile(tail), combined_.quantile(1.0 - tail)};
}

double silverman_bandwidth(const QuantityLaw& law) {
    const auto m = weighted_moments(law.values(), law.masses());
    double iqr = 0.0;
    if (law.size() > 1) iqr = law.quantile(0.75) - law.quantile(0.25);
    double a = std::sqrt(std::max(m.variance, 0.0));
    if (iqr > 0.0) a = std::min(a, iqr / 1.34);
    double sum_sq = 0.0;
    for (double w : law.masses()) sum_sq += w * w;
    const double total = law.total_mass();
    const double n_eff = sum_sq > 0.0 ? total * total / sum_sq : 1.0;
    double h = 0.9 * a * std::pow(n_eff, -0.2);
    if (!(h > 0.0) || !std::isfinite(h)) {
        h = 1e-6 * std::max(1.0, std::abs(law.values().front()));
    }
    return h;
}

std::vector<double> smoothed_density(const QuantityLaw& law,
                                     std::span<const double> grid) {
    const double h = silverman_bandwidth(law);
    const double lo_v = law.values().front();
    const double hi_v = law.values().back();

    // Pre-bin very large atom sets; this is a plotting surface, the exact law
    // stays untouched.
    std::vector<double> vals, mass;
    if (law.size() > 8192 && hi_v > lo_v) {
        const std::size_t bins = 4096;
        vals.resize(bins);
        mass.assign(bins, 0.0);
        const double width = (hi_v - lo_v) / static_cast<double>(bins);
        for (std::size_t b = 0; b < bins; ++b) {
            vals[b] = lo_v + width * (static_cast<double>(b) + 0.5);
        }
        for (std::size_t k = 0; k < law.size(); ++k) {
            auto b = static_cast<std::size_t>((law.values()[k] - lo_v) / width);
            if (b >= bins) b = bins - 1;
            mass[b] += law.masses()[k];
        }
    } else {
        vals = law.values();
        mass = law.masses();
    }

    const double inv_norm = 1.0 / (h * std::sqrt(2.0 * 3.14159265358979323846));
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double dens = 0.0;
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const double z = (grid[j] - vals[k]) / h;
            dens += mass[k] * std::exp(-0.5 * z * z);
        }
        out[j] = dens * inv_norm;
    }
    return out;
}

DensityTable MixturePosterior::density_table(std::size_t grid_points) const {
    DensityTable table;
    if (grid_points < 2) grid_points = 2;
    const auto& law = combined_;
    const double h = silverman_bandwidth(law);
    const double grid_lo = law.values().front() - 3.0 * h;
    const double grid_hi = law.values().back() + 3.0 * h;
    const double step = (grid_hi - grid_lo) / static_cast<double>(grid_points - 1);
    table.q.resize(grid_points);
    for (std::size_t j = 0; j < grid_points; ++j) {
        table.q[j] = grid_lo + step * static_cast<double>(j);
    }
    table.density = smoothed_density(law, table.q);
    table.cdf.resize(grid_points);
    for (std::size_t j = 0; j < grid_points; ++j) {
        table.cdf[j] = law.cdf(table.q[j]);
    }
    return table;
}

MixturePosterior mixture_posterior(const PopulationSpaceModel& model,
                                   const ModelWeights& weights,
                                   const std::vector<ConditionalPosterior>& posteriors,
                                   const QuantitySpec& q) {
    if (weights.weights.size() != model.size() || posteriors.size() != model.size()) {
        throw MisuseError("mixture: weights and posteriors must align with the model");
    }
    weights.validate();
    std::vector<QuantityLaw> laws(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (!(weights.weights[i] > 0.0)) continue; // excluded families stay empty
        const Family& fam = *model.entry(i).family;
        try {
            laws[i] = family_quantity_posterior(fam, posteriors[i], q);
        } catch (const UndefinedQuantityError& e) {
            throw UndefinedQuantityError("family '" + fam.id() +
                                         "' carries positive weight but its quantity "
                                         "is undefined: " + e.what());
        }
    }
    return MixturePosterior(weights.weights, std::move(laws), q);
}

QuantitySummary summarize(const MixturePosterior& mp, double level,
                          std::size_t table_points) {
    QuantitySummary s;
    s.mean = mp.mean();
    s.interval = mp.interval(level);
    s.level = level;
    s.table = mp.density_table(table_points);
    return s;
}

} // namespace openpop
