#include "openpop/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

#include "openpop/errors.hpp"
#include "openpop/parallel.hpp"

namespace openpop {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

// ---------------------------------------------------------------------------
// Priors
// ---------------------------------------------------------------------------

void ComponentPrior::validate() const {
    switch (kind) {
        case Kind::normal:
        case Kind::lognormal:
            if (!std::isfinite(a) || !(b > 0.0) || !std::isfinite(b)) {
                throw ConfigError("prior: location must be finite and spread positive");
            }
            return;
        case Kind::gamma:
            if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
                throw ConfigError("prior: gamma shape and scale must be positive and finite");
            }
            return;
        case Kind::uniform:
            if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
                throw ConfigError(
                    "prior: uniform must have finite bounds with lo < hi (improper "
                    "priors are rejected)");
            }
            return;
        case Kind::point_mass:
            if (!std::isfinite(a)) {
                throw ConfigError("prior: point mass value must be finite");
            }
            return;
    }
    throw ConfigError("prior: unknown kind");
}

double ComponentPrior::log_pdf(double x) const {
    switch (kind) {
        case Kind::normal: {
            const double z = (x - a) / b;
            return -0.5 * kLogTwoPi - std::log(b) - 0.5 * z * z;
        }
        case Kind::lognormal: {
            if (!(x > 0.0)) return kNegInf;
            const double z = (std::log(x) - a) / b;
            return -std::log(x) - std::log(b) - 0.5 * kLogTwoPi - 0.5 * z * z;
        }
        case Kind::gamma:
            if (!(x > 0.0)) return kNegInf;
            return (a - 1.0) * std::log(x) - x / b - a * std::log(b) -
                   boost::math::lgamma(a);
        case Kind::uniform:
            return (x >= a && x <= b) ? -std::log(b - a) : kNegInf;
        case Kind::point_mass:
            // Probability mass, not a density: contributes factor 1 at the pin.
            return x == a ? 0.0 : kNegInf;
    }
    return kNegInf;
}

Interval ComponentPrior::support() const {
    switch (kind) {
        case Kind::normal: return {kNegInf, kPosInf};
        case Kind::lognormal: return {0.0, kPosInf};
        case Kind::gamma: return {0.0, kPosInf};
        case Kind::uniform: return {a, b};
        case Kind::point_mass: return {a, a};
    }
    return {kNegInf, kPosInf};
}

double ComponentPrior::central() const {
    switch (kind) {
        case Kind::normal: return a;
        case Kind::lognormal: return std::exp(a);
        case Kind::gamma: return a * b;
        case Kind::uniform: return 0.5 * (a + b);
        case Kind::point_mass: return a;
    }
    return 0.0;
}

double ComponentPrior::spread(bool log_transformed) const {
    switch (kind) {
        case Kind::normal: return b;
        case Kind::lognormal:
            return log_transformed
                       ? b
                       : std::exp(a + 0.5 * b * b) * std::sqrt(std::expm1(b * b));
        case Kind::gamma:
            return log_transformed ? 1.0 / std::sqrt(a) : b * std::sqrt(a);
        case Kind::uniform: {
            if (!log_transformed) return (b - a) / std::sqrt(12.0);
            const double lo = std::max(a, 1e-12 * std::max(1.0, b));
            return (std::log(b) - std::log(lo)) / std::sqrt(12.0);
        }
        case Kind::point_mass: return 0.0;
    }
    return 1.0;
}

void PriorSpec::validate() const {
    for (const auto& c : components) c.validate();
}

void validate_prior_for(const Family& family, const PriorSpec& prior) {
    if (prior.components.size() != family.dim()) {
        throw ConfigError("prior for '" + family.id() + "' has " +
                          std::to_string(prior.components.size()) +
                          " components, family needs " + std::to_string(family.dim()));
    }
    prior.validate();
    for (std::size_t j = 0; j < family.dim(); ++j) {
        const Interval s = prior.components[j].support();
        const Bound& b = family.components()[j].bound;
        if (s.lo < b.lo || s.hi > b.hi) {
            throw ConfigError("prior for '" + family.id() + "' component '" +
                              family.components()[j].name +
                              "' puts mass outside the parameter bound");
        }
    }
}

double PriorSpec::log_pdf(const ParamVector& theta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        const double lp = components[i].log_pdf(theta[i]);
        if (lp == kNegInf) return kNegInf;
        s += lp;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Posterior representation
// ---------------------------------------------------------------------------

void ConditionalPosterior::validate(const Family& family) const {
    if (nodes.size() != masses.size()) {
        throw MisuseError("posterior: node/mass size mismatch");
    }
    if (nodes.empty()) {
        throw MisuseError("posterior: empty representation");
    }
    std::vector<double> nonneg = masses;
    for (double m : nonneg) {
        if (!(m >= 0.0)) throw MisuseError("posterior: negative mass");
    }
    const double total = compensated_sum(nonneg);
    if (std::abs(total - 1.0) > 1e-12) {
        throw MisuseError("posterior: masses do not sum to 1");
    }
    for (const auto& node : nodes) {
        family.require_in_bounds(node);
    }
}

// ---------------------------------------------------------------------------
// The data-parallel kernel
// ---------------------------------------------------------------------------

std::vector<double> log_posterior_at(const Family& family, const PriorSpec& prior,
                                     const Dataset& data,
                                     const std::vector<ParamVector>& thetas,
                                     bool parallel) {
    for (const auto& t : thetas) family.require_in_bounds(t);
    const auto loglik = family.make_log_likelihood(data);
    std::vector<double> out(thetas.size());
    auto body = [&](std::size_t i) {
        const double lp = prior.log_pdf(thetas[i]);
        out[i] = lp == kNegInf ? kNegInf : lp + (*loglik)(thetas[i]);
    };
    if (parallel) {
        parallel_for(static_cast<std::ptrdiff_t>(thetas.size()), body);
    } else {
        serial_for(static_cast<std::ptrdiff_t>(thetas.size()), body);
    }
    return out;
}

// ---------------------------------------------------------------------------
// bayes-grid engine
// ---------------------------------------------------------------------------

namespace {

enum class Transform { identity, shifted_log };

struct Axis {
    std::size_t component = 0;   // index into the family's components
    Transform transform = Transform::identity;
    double shift = 0.0;          // theta = shift + exp(u) for shifted_log
    double feas_lo = kNegInf;    // feasible interval in u space
    double feas_hi = kPosInf;
    double mode_u = 0.0;
    double sd_u = 1.0;
    double grid_lo = 0.0;
    double grid_hi = 0.0;
    double step = 0.0;

    double to_theta(double u) const {
        return transform == Transform::identity ? u : shift + std::exp(u);
    }
    double to_u(double theta) const {
        if (transform == Transform::identity) return theta;
        const double d = theta - shift;
        return d > 0.0 ? std::log(d) : kNegInf;
    }
    double log_jacobian(double u) const {
        return transform == Transform::identity ? 0.0 : u;
    }
};

class BayesGridEngine final : public InferenceEngine {
public:
    std::string name() const override { return "bayes-grid"; }

    ConditionalPosterior fit(const Family& family, const PriorSpec& prior,
                             const Dataset& data,
                             const FitSettings& settings) const override {
        if (prior.components.size() != family.dim()) {
            throw ConfigError(family.id() + ": prior has " +
                              std::to_string(prior.components.size()) +
                              " components, family needs " + std::to_string(family.dim()));
        }
        prior.validate();
        if (settings.grid_nodes < 3) {
            throw ConfigError("grid_nodes must be at least 3");
        }

        // Split components into pinned (point-mass prior) and free ones.
        std::vector<std::size_t> free_idx;
        ParamVector pinned(std::vector<double>(family.dim(), 0.0));
        for (std::size_t j = 0; j < family.dim(); ++j) {
            if (prior.components[j].kind == ComponentPrior::Kind::point_mass) {
                const double v = prior.components[j].a;
                if (!family.components()[j].bound.contains(v)) {
                    throw ParameterDomainError(family.id() + ": point-mass prior for '" +
                                               family.components()[j].name +
                                               "' violates its bound");
                }
                pinned[j] = v;
            } else {
                free_idx.push_back(j);
            }
        }
        if (free_idx.size() > 2) {
            throw ConfigError(family.id() +
                              ": the grid engine supports at most 2 free parameters");
        }

        const auto loglik = family.make_log_likelihood(data);

        std::vector<Axis> axes;
        for (std::size_t j : free_idx) {
            axes.push_back(make_axis(family, prior, j));
        }

        ParamVector work = pinned;
        auto objective = [&](const std::vector<double>& u) {
            double log_jac = 0.0;
            for (std::size_t k = 0; k < axes.size(); ++k) {
                const double theta = axes[k].to_theta(u[k]);
                if (!family.components()[axes[k].component].bound.contains(theta) ||
                    !std::isfinite(theta)) {
                    return kNegInf;
                }
                work[axes[k].component] = theta;
                log_jac += axes[k].log_jacobian(u[k]);
            }
            const double lp = prior.log_pdf(work);
            if (lp == kNegInf) return kNegInf;
            const double ll = (*loglik)(work);
            if (ll == kNegInf) return kNegInf;
            return lp + ll + log_jac;
        };

        std::vector<double> mode(axes.size());
        for (std::size_t k = 0; k < axes.size(); ++k) {
            mode[k] = initial_guess(family, prior, axes[k], data);
        }
        find_mode(objective, axes, mode);
        estimate_curvature(objective, axes, mode);

        // Grid: mode +/- span_sd curvature sds per axis, clipped to the
        // feasible interval, equally spaced in the transformed coordinate.
        const int n_nodes = settings.grid_nodes;
        for (auto& ax : axes) {
            double lo = ax.mode_u - settings.span_sd * ax.sd_u;
            double hi = ax.mode_u + settings.span_sd * ax.sd_u;
            lo = std::max(lo, ax.feas_lo);
            hi = std::min(hi, ax.feas_hi);
            if (!(lo < hi)) {
                const double pad = std::max(1e-8, 1e-8 * std::abs(ax.mode_u));
                lo = ax.mode_u - pad;
                hi = ax.mode_u + pad;
            }
            ax.grid_lo = lo;
            ax.grid_hi = hi;
            ax.step = (hi - lo) / static_cast<double>(n_nodes - 1);
        }

        // Tensor nodes in row-major order (fixed, for reproducibility).
        const std::size_t total =
            axes.empty() ? 1
                         : (axes.size() == 1
                                ? static_cast<std::size_t>(n_nodes)
                                : static_cast<std::size_t>(n_nodes) *
                                      static_cast<std::size_t>(n_nodes));
        std::vector<ParamVector> nodes(total, pinned);
        std::vector<double> log_jac(total, 0.0);
        if (axes.size() == 1) {
            for (int i = 0; i < n_nodes; ++i) {
                const double u = axes[0].grid_lo + axes[0].step * i;
                nodes[static_cast<std::size_t>(i)][axes[0].component] = axes[0].to_theta(u);
                log_jac[static_cast<std::size_t>(i)] = axes[0].log_jacobian(u);
            }
        } else if (axes.size() == 2) {
            std::size_t k = 0;
            for (int i = 0; i < n_nodes; ++i) {
                const double u0 = axes[0].grid_lo + axes[0].step * i;
                const double t0 = axes[0].to_theta(u0);
                const double j0 = axes[0].log_jacobian(u0);
                for (int j = 0; j < n_nodes; ++j, ++k) {
                    const double u1 = axes[1].grid_lo + axes[1].step * j;
                    nodes[k][axes[0].component] = t0;
                    nodes[k][axes[1].component] = axes[1].to_theta(u1);
                    log_jac[k] = j0 + axes[1].log_jacobian(u1);
                }
            }
        }

        std::vector<double> logpost = log_posterior_at(family, prior, data, nodes, true);
        for (std::size_t k = 0; k < total; ++k) {
            if (logpost[k] != kNegInf) logpost[k] += log_jac[k];
        }

        double peak = kNegInf;
        for (double v : logpost) peak = std::max(peak, v);
        if (peak == kNegInf) {
            throw DegenerateFitError(family.id() +
                                     ": zero posterior mass everywhere on the grid");
        }

        std::vector<double> masses(total);
        for (std::size_t k = 0; k < total; ++k) {
            masses[k] = std::exp(logpost[k] - peak);
        }
        const double sum = compensated_sum(masses);
        for (double& m : masses) m /= sum;

        double log_volume = 0.0;
        for (const auto& ax : axes) log_volume += std::log(ax.step);

        ConditionalPosterior post;
        post.repr = ConditionalPosterior::Repr::grid;
        post.nodes = std::move(nodes);
        post.masses = std::move(masses);
        post.log_normalizing_constant = peak + std::log(sum) + log_volume;
        post.data_fingerprint = data.fingerprint();
        post.validate(family);
        return post;
    }

private:
    static Axis make_axis(const Family& family, const PriorSpec& prior, std::size_t j) {
        Axis ax;
        ax.component = j;
        const Bound& b = family.components()[j].bound;
        if (b.lo > kNegInf && b.hi == kPosInf) {
            ax.transform = Transform::shifted_log;
            ax.shift = b.lo;
        } else {
            ax.transform = Transform::identity;
        }
        const Interval ps = prior.components[j].support();
        const double lo = std::max(b.lo, ps.lo);
        const double hi = std::min(b.hi, ps.hi);
        ax.feas_lo = ax.transform == Transform::identity ? lo : ax.to_u(lo);
        ax.feas_hi = ax.transform == Transform::identity ? hi : ax.to_u(hi);
        if (std::isnan(ax.feas_lo)) ax.feas_lo = kNegInf;
        if (std::isnan(ax.feas_hi)) ax.feas_hi = kPosInf;
        // Seed the scale with the prior spread; curvature refines it later.
        ax.sd_u = std::clamp(
            prior.components[j].spread(ax.transform == Transform::shifted_log), 1e-3,
            1e6);
        return ax;
    }

    static double initial_guess(const Family& family, const PriorSpec& prior,
                                const Axis& ax, const Dataset& data) {
        double theta0 = prior.components[ax.component].central();
        // Prefer a data-informed start when the family supports it.
        if (family.has_moment_parametrization()) {
            const auto m = weighted_moments(
                data.values(), std::vector<double>(data.n(), 1.0));
            if (m.variance > 0.0) {
                try {
                    const ParamVector t = family.moments_to_params(m.mean, m.variance);
                    theta0 = t[ax.component];
                } catch (const Error&) {
                    // keep the prior central value
                }
            }
        }
        double u = ax.to_u(theta0);
        if (!std::isfinite(u)) u = 0.5 * (std::max(ax.feas_lo, -1.0) + std::min(ax.feas_hi, 1.0));
        return std::clamp(u, std::max(ax.feas_lo, -1e12), std::min(ax.feas_hi, 1e12));
    }

    /// Coordinate descent: per coordinate a coarse scan locates the basin
    /// (robust to -inf plateaus from support windows), then golden-section
    /// refines inside it.
    template <class Obj>
    static void find_mode(const Obj& objective, std::vector<Axis>& axes,
                          std::vector<double>& mode) {
        if (axes.empty()) return;
        std::vector<double> u = mode;
        double best = objective(u);
        constexpr int kScan = 64;
        for (int sweep = 0; sweep < 12; ++sweep) {
            const double before = best;
            for (std::size_t k = 0; k < axes.size(); ++k) {
                const Axis& ax = axes[k];
                double width = std::max(1.0, 4.0 * ax.sd_u);
                for (int expand = 0; expand < 6; ++expand) {
                    const double lo = std::max(u[k] - width, ax.feas_lo);
                    const double hi = std::min(u[k] + width, ax.feas_hi);
                    if (!(lo < hi)) break;
                    auto slice = [&](double x) {
                        std::vector<double> probe = u;
                        probe[k] = x;
                        return objective(probe);
                    };
                    const double step = (hi - lo) / kScan;
                    double scan_x = u[k];
                    double scan_v = best;
                    for (int i = 0; i <= kScan; ++i) {
                        const double x = lo + step * i;
                        const double v = slice(x);
                        if (v > scan_v) {
                            scan_v = v;
                            scan_x = x;
                        }
                    }
                    const double glo = std::max(lo, scan_x - step);
                    const double ghi = std::min(hi, scan_x + step);
                    const double arg = golden_section_min(
                        [&](double x) { return -slice(x); }, glo, ghi, 1e-11);
                    const double val = slice(arg);
                    if (val >= scan_v) {
                        scan_v = val;
                        scan_x = arg;
                    }
                    if (scan_v > best || best == kNegInf) {
                        u[k] = scan_x;
                        best = scan_v;
                    }
                    // Re-search wider when the optimum pressed against an
                    // unclipped bracket edge.
                    const double margin = 2.0 * step;
                    const bool at_lo = scan_x - lo < margin && lo > ax.feas_lo;
                    const bool at_hi = hi - scan_x < margin && hi < ax.feas_hi;
                    if (!at_lo && !at_hi) break;
                    width *= 4.0;
                }
            }
            if (best != kNegInf && before != kNegInf &&
                std::abs(best - before) < 1e-10 * (1.0 + std::abs(best)) && sweep >= 1) {
                break;
            }
        }
        mode = u;
        for (std::size_t k = 0; k < axes.size(); ++k) axes[k].mode_u = u[k];
    }

    template <class Obj>
    static void estimate_curvature(const Obj& objective, std::vector<Axis>& axes,
                                   const std::vector<double>& mode) {
        if (axes.empty()) return;
        const double f0 = objective(mode);
        for (std::size_t k = 0; k < axes.size(); ++k) {
            Axis& ax = axes[k];
            const double h = 1e-3 * std::max(1.0, std::abs(mode[k]));
            std::vector<double> up = mode, dn = mode;
            up[k] += h;
            dn[k] -= h;
            const double fu = objective(up);
            const double fd = objective(dn);
            double sd = kPosInf;
            if (std::isfinite(f0) && std::isfinite(fu) && std::isfinite(fd)) {
                const double d2 = (fu - 2.0 * f0 + fd) / (h * h);
                if (d2 < -1e-12) sd = 1.0 / std::sqrt(-d2);
            }
            if (!std::isfinite(sd)) {
                // Flat or cliff-edged posterior: span the feasible box when it
                // is finite, else keep the prior-spread seed.
                sd = (std::isfinite(ax.feas_lo) && std::isfinite(ax.feas_hi))
                         ? 0.25 * (ax.feas_hi - ax.feas_lo)
                         : ax.sd_u;
            }
            ax.sd_u = std::clamp(sd, 1e-8, 1e6);
        }
    }
};

struct EngineRegistry {
    std::mutex mutex;
    std::map<std::string, std::shared_ptr<const InferenceEngine>> engines;

    EngineRegistry() { engines["bayes-grid"] = std::make_shared<BayesGridEngine>(); }
};

EngineRegistry& registry() {
    static EngineRegistry r;
    return r;
}

} // namespace

void register_engine(std::shared_ptr<const InferenceEngine> engine) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.engines[engine->name()] = std::move(engine);
}

std::shared_ptr<const InferenceEngine> find_engine(const std::string& name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    const auto it = r.engines.find(name);
    if (it == r.engines.end()) {
        throw ConfigError("unknown inference engine '" + name + "'");
    }
    return it->second;
}

ConditionalPosterior fit_conditional_posterior(const Family& family,
                                               const PriorSpec& prior,
                                               const Dataset& data,
                                               const FitSettings& settings) {
    return find_engine(settings.engine)->fit(family, prior, data, settings);
}

double log_marginal_likelihood(const Family& family, const PriorSpec& prior,
                               const Dataset& data, const FitSettings& settings) {
    return fit_conditional_posterior(family, prior, data, settings)
        .log_normalizing_constant;
}

} // namespace openpop
