#include "openpop/families.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "openpop/errors.hpp"

namespace openpop {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

double normal_log_pdf(double z) { return -0.5 * kLogTwoPi - 0.5 * z * z; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> unit(0.0, 1.0);
    return boost::math::quantile(unit, p);
}

void require_probability(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw Error("quantile: p must lie strictly inside (0,1)");
    }
}

} // namespace

Family::Family(std::string id, std::string display_name,
               std::vector<ComponentSpec> components, std::string region_label)
    : id_(std::move(id)),
      display_name_(std::move(display_name)),
      components_(std::move(components)),
      region_label_(std::move(region_label)) {}

std::ptrdiff_t Family::component_index(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < components_.size(); ++i) {
        if (components_[i].name == name) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
}

bool Family::in_bounds(const ParamVector& theta) const noexcept {
    if (theta.size() != components_.size()) return false;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        if (!std::isfinite(theta[i]) || !components_[i].bound.contains(theta[i])) {
            return false;
        }
    }
    return true;
}

void Family::require_in_bounds(const ParamVector& theta) const {
    if (!in_bounds(theta)) {
        std::ostringstream msg;
        msg << id_ << ": parameter vector (";
        for (std::size_t i = 0; i < theta.size(); ++i) {
            msg << (i ? ", " : "") << theta[i];
        }
        msg << ") violates the declared bounds";
        throw ParameterDomainError(msg.str());
    }
}

MomentDomain Family::moment_domain() const {
    return {Bound::real_line(), Bound::positive()};
}

ParamVector Family::moments_to_params(double, double) const {
    throw MomentDomainError(id_ + ": no (mean, variance) parametrization");
}

Dataset Family::sample(const ParamVector& theta, std::size_t n,
                       std::uint64_t seed) const {
    require_in_bounds(theta);
    std::mt19937_64 eng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = quantile(theta, canonical_u01(eng()));
    }
    return Dataset(std::move(out));
}

namespace {

/// Fallback evaluator: one log_density call per data point.
class GenericLogLikelihood final : public LogLikelihood {
public:
    GenericLogLikelihood(const Family& family, const Dataset& data)
        : family_(family), values_(data.values()) {}

    double operator()(const ParamVector& theta) const override {
        double s = 0.0;
        for (double y : values_) {
            const double ld = family_.log_density(theta, y);
            if (ld == kNegInf) return kNegInf;
            s += ld;
        }
        return s;
    }

private:
    const Family& family_;
    std::vector<double> values_;
};

} // namespace

std::unique_ptr<LogLikelihood> Family::make_log_likelihood(const Dataset& data) const {
    return std::make_unique<GenericLogLikelihood>(*this, data);
}

// ---------------------------------------------------------------------------
// Normal
// ---------------------------------------------------------------------------

namespace {

class NormalLogLik final : public LogLikelihood {
public:
    explicit NormalLogLik(const Dataset& data) {
        n_ = static_cast<double>(data.n());
        for (double y : data.values()) {
            sum_ += y;
            sum_sq_ += y * y;
        }
    }
    double operator()(const ParamVector& t) const override {
        const double mu = t[0], sigma = t[1];
        const double ss = sum_sq_ - 2.0 * mu * sum_ + n_ * mu * mu;
        return -n_ * std::log(sigma) - 0.5 * n_ * kLogTwoPi - ss / (2.0 * sigma * sigma);
    }

private:
    double n_ = 0.0, sum_ = 0.0, sum_sq_ = 0.0;
};

class NormalFamily final : public Family {
public:
    explicit NormalFamily(std::string region)
        : Family("normal", "Normal",
                 {{"mu", Bound::real_line()}, {"sigma", Bound::positive()}},
                 std::move(region)) {}

    double log_density(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        return normal_log_pdf((y - t[0]) / t[1]) - std::log(t[1]);
    }
    double cdf(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        return normal_cdf((y - t[0]) / t[1]);
    }
    double quantile(const ParamVector& t, double p) const override {
        require_in_bounds(t);
        require_probability(p);
        return t[0] + t[1] * normal_quantile(p);
    }
    Interval support(const ParamVector&) const override { return {kNegInf, kPosInf}; }
    Moments params_to_moments(const ParamVector& t) const override {
        require_in_bounds(t);
        return {t[0], t[1] * t[1]};
    }
    bool has_moment_parametrization() const noexcept override { return true; }
    ParamVector moments_to_params(double mean, double variance) const override {
        if (!(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
            throw MomentDomainError("normal: requires finite mean and variance > 0");
        }
        return ParamVector{mean, std::sqrt(variance)};
    }
    std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& d) const override {
        return std::make_unique<NormalLogLik>(d);
    }
};

// ---------------------------------------------------------------------------
// Log-normal
// ---------------------------------------------------------------------------

class LogNormalLogLik final : public LogLikelihood {
public:
    explicit LogNormalLogLik(const Dataset& data) {
        n_ = static_cast<double>(data.n());
        for (double y : data.values()) {
            if (!(y > 0.0)) {
                impossible_ = true;
                return;
            }
            const double ly = std::log(y);
            sum_log_ += ly;
            sum_log_sq_ += ly * ly;
        }
    }
    double operator()(const ParamVector& t) const override {
        if (impossible_) return kNegInf;
        const double ml = t[0], sl = t[1];
        const double ss = sum_log_sq_ - 2.0 * ml * sum_log_ + n_ * ml * ml;
        return -sum_log_ - n_ * std::log(sl) - 0.5 * n_ * kLogTwoPi - ss / (2.0 * sl * sl);
    }

private:
    double n_ = 0.0, sum_log_ = 0.0, sum_log_sq_ = 0.0;
    bool impossible_ = false;
};

class LogNormalFamily final : public Family {
public:
    explicit LogNormalFamily(std::string region)
        : Family("lognormal", "Log-normal",
                 {{"meanlog", Bound::real_line()}, {"sdlog", Bound::positive()}},
                 std::move(region)) {}

    double log_density(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        if (!(y > 0.0)) return kNegInf;
        const double z = (std::log(y) - t[0]) / t[1];
        return normal_log_pdf(z) - std::log(t[1]) - std::log(y);
    }
    double cdf(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        if (!(y > 0.0)) return 0.0;
        return normal_cdf((std::log(y) - t[0]) / t[1]);
    }
    double quantile(const ParamVector& t, double p) const override {
        require_in_bounds(t);
        require_probability(p);
        return std::exp(t[0] + t[1] * normal_quantile(p));
    }
    Interval support(const ParamVector&) const override { return {0.0, kPosInf}; }
    Moments params_to_moments(const ParamVector& t) const override {
        require_in_bounds(t);
        const double ml = t[0], sl2 = t[1] * t[1];
        const double mean = std::exp(ml + 0.5 * sl2);
        const double variance = std::expm1(sl2) * std::exp(2.0 * ml + sl2);
        return {mean, variance};
    }
    bool has_moment_parametrization() const noexcept override { return true; }
    MomentDomain moment_domain() const override {
        return {Bound::positive(), Bound::positive()};
    }
    ParamVector moments_to_params(double mean, double variance) const override {
        if (!(mean > 0.0) || !(variance > 0.0)) {
            throw MomentDomainError("lognormal: requires mean > 0 and variance > 0");
        }
        const double sl2 = std::log1p(variance / (mean * mean));
        const double sl = std::sqrt(sl2);
        if (!(sl > 0.0)) {
            throw MomentDomainError("lognormal: variance too small relative to mean");
        }
        return ParamVector{std::log(mean) - 0.5 * sl2, sl};
    }
    std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& d) const override {
        return std::make_unique<LogNormalLogLik>(d);
    }
};

// ---------------------------------------------------------------------------
// Gamma (shape, scale)
// ---------------------------------------------------------------------------

class GammaLogLik final : public LogLikelihood {
public:
    explicit GammaLogLik(const Dataset& data) {
        n_ = static_cast<double>(data.n());
        for (double y : data.values()) {
            if (!(y > 0.0)) {
                impossible_ = true;
                return;
            }
            sum_ += y;
            sum_log_ += std::log(y);
        }
    }
    double operator()(const ParamVector& t) const override {
        if (impossible_) return kNegInf;
        const double k = t[0], s = t[1];
        return (k - 1.0) * sum_log_ - sum_ / s - n_ * k * std::log(s) -
               n_ * boost::math::lgamma(k);
    }

private:
    double n_ = 0.0, sum_ = 0.0, sum_log_ = 0.0;
    bool impossible_ = false;
};

class GammaFamily final : public Family {
public:
    explicit GammaFamily(std::string region)
        : Family("gamma", "Gamma",
                 {{"shape", Bound::positive()}, {"scale", Bound::positive()}},
                 std::move(region)) {}

    double log_density(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        if (!(y > 0.0)) return kNegInf;
        const double k = t[0], s = t[1];
        return (k - 1.0) * std::log(y) - y / s - k * std::log(s) -
               boost::math::lgamma(k);
    }
    double cdf(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        if (!(y > 0.0)) return 0.0;
        return boost::math::gamma_p(t[0], y / t[1]);
    }
    double quantile(const ParamVector& t, double p) const override {
        require_in_bounds(t);
        require_probability(p);
        return t[1] * boost::math::gamma_p_inv(t[0], p);
    }
    Interval support(const ParamVector&) const override { return {0.0, kPosInf}; }
    Moments params_to_moments(const ParamVector& t) const override {
        require_in_bounds(t);
        return {t[0] * t[1], t[0] * t[1] * t[1]};
    }
    bool has_moment_parametrization() const noexcept override { return true; }
    MomentDomain moment_domain() const override {
        return {Bound::positive(), Bound::positive()};
    }
    ParamVector moments_to_params(double mean, double variance) const override {
        if (!(mean > 0.0) || !(variance > 0.0)) {
            throw MomentDomainError("gamma: requires mean > 0 and variance > 0");
        }
        return ParamVector{mean * mean / variance, variance / mean};
    }
    std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& d) const override {
        return std::make_unique<GammaLogLik>(d);
    }
};

// ---------------------------------------------------------------------------
// Uniform location with known half-width
// ---------------------------------------------------------------------------

class UniformLocLogLik final : public LogLikelihood {
public:
    UniformLocLogLik(const Dataset& data, double a) : a_(a) {
        n_ = static_cast<double>(data.n());
        min_ = *std::min_element(data.values().begin(), data.values().end());
        max_ = *std::max_element(data.values().begin(), data.values().end());
    }
    double operator()(const ParamVector& t) const override {
        const double theta = t[0];
        if (theta < max_ - a_ || theta > min_ + a_) return kNegInf;
        return -n_ * std::log(2.0 * a_);
    }

private:
    double a_, n_ = 0.0, min_ = 0.0, max_ = 0.0;
};

class UniformLocationFamily final : public Family {
public:
    UniformLocationFamily(double half_width, std::string region)
        : Family("uniform_loc", "Uniform (known half-width)",
                 {{"theta", Bound::real_line()}}, std::move(region)),
          a_(half_width) {
        if (!(half_width > 0.0) || !std::isfinite(half_width)) {
            throw ConfigError("uniform_loc: half-width a must be positive and finite");
        }
    }

    double half_width() const noexcept { return a_; }

    double log_density(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        return std::abs(y - t[0]) <= a_ ? -std::log(2.0 * a_) : kNegInf;
    }
    double cdf(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        const double u = (y - t[0] + a_) / (2.0 * a_);
        return std::clamp(u, 0.0, 1.0);
    }
    double quantile(const ParamVector& t, double p) const override {
        require_in_bounds(t);
        require_probability(p);
        return t[0] - a_ + 2.0 * a_ * p;
    }
    Interval support(const ParamVector& t) const override {
        return {t[0] - a_, t[0] + a_};
    }
    Moments params_to_moments(const ParamVector& t) const override {
        require_in_bounds(t);
        return {t[0], a_ * a_ / 3.0};
    }
    // Variance is pinned at a^2/3, so there is no free (mean, variance)
    // parametrization; only a matching variance is accepted.
    ParamVector moments_to_params(double mean, double variance) const override {
        const double fixed = a_ * a_ / 3.0;
        if (!std::isfinite(mean) || !(std::abs(variance - fixed) <= 1e-6 * fixed)) {
            throw MomentDomainError(
                "uniform_loc: variance is fixed at a^2/3 by the known half-width");
        }
        return ParamVector{mean};
    }
    std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& d) const override {
        return std::make_unique<UniformLocLogLik>(d, a_);
    }

private:
    double a_;
};

// ---------------------------------------------------------------------------
// Student-t location-scale with fixed dof
// ---------------------------------------------------------------------------

class StudentTLogLik final : public LogLikelihood {
public:
    StudentTLogLik(const Dataset& data, double nu)
        : values_(data.values()),
          nu_(nu),
          log_norm_(boost::math::lgamma(0.5 * (nu + 1.0)) -
                    boost::math::lgamma(0.5 * nu) -
                    0.5 * std::log(nu * 3.14159265358979323846)) {}

    double operator()(const ParamVector& t) const override {
        const double mu = t[0], s = t[1];
        const double n = static_cast<double>(values_.size());
        double acc = n * (log_norm_ - std::log(s));
        const double half = 0.5 * (nu_ + 1.0);
        for (double y : values_) {
            const double z = (y - mu) / s;
            acc -= half * std::log1p(z * z / nu_);
        }
        return acc;
    }

private:
    std::vector<double> values_;
    double nu_;
    double log_norm_;
};

class StudentTFamily final : public Family {
public:
    StudentTFamily(double nu, std::string region)
        : Family("student_t", "Student-t (location-scale)",
                 {{"mu", Bound::real_line()}, {"s", Bound::positive()}},
                 std::move(region)),
          nu_(validated_dof(nu)),
          dist_(nu_) {}

    double dof() const noexcept { return nu_; }

    double log_density(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        const double z = (y - t[0]) / t[1];
        return boost::math::lgamma(0.5 * (nu_ + 1.0)) - boost::math::lgamma(0.5 * nu_) -
               0.5 * std::log(nu_ * 3.14159265358979323846) - std::log(t[1]) -
               0.5 * (nu_ + 1.0) * std::log1p(z * z / nu_);
    }
    double cdf(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        return boost::math::cdf(dist_, (y - t[0]) / t[1]);
    }
    double quantile(const ParamVector& t, double p) const override {
        require_in_bounds(t);
        require_probability(p);
        return t[0] + t[1] * boost::math::quantile(dist_, p);
    }
    Interval support(const ParamVector&) const override { return {kNegInf, kPosInf}; }
    Moments params_to_moments(const ParamVector& t) const override {
        require_in_bounds(t);
        if (!(nu_ > 2.0)) {
            if (!(nu_ > 1.0)) {
                throw UndefinedQuantityError("student_t: mean undefined for nu <= 1");
            }
            throw UndefinedQuantityError("student_t: variance undefined for nu <= 2");
        }
        return {t[0], t[1] * t[1] * nu_ / (nu_ - 2.0)};
    }
    bool has_moment_parametrization() const noexcept override { return nu_ > 2.0; }
    ParamVector moments_to_params(double mean, double variance) const override {
        if (!(nu_ > 2.0)) {
            throw MomentDomainError("student_t: no finite variance for nu <= 2");
        }
        if (!(variance > 0.0) || !std::isfinite(mean)) {
            throw MomentDomainError("student_t: requires finite mean and variance > 0");
        }
        return ParamVector{mean, std::sqrt(variance * (nu_ - 2.0) / nu_)};
    }
    std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& d) const override {
        return std::make_unique<StudentTLogLik>(d, nu_);
    }

private:
    static double validated_dof(double nu) {
        if (!(nu > 0.0) || !std::isfinite(nu)) {
            throw ConfigError(
                "student_t: degrees of freedom nu must be positive and finite");
        }
        return nu;
    }

    double nu_;
    boost::math::students_t_distribution<double> dist_;
};

} // namespace

FamilyPtr make_normal_family(std::string region_label) {
    return std::make_shared<NormalFamily>(std::move(region_label));
}
FamilyPtr make_lognormal_family(std::string region_label) {
    return std::make_shared<LogNormalFamily>(std::move(region_label));
}
FamilyPtr make_gamma_family(std::string region_label) {
    return std::make_shared<GammaFamily>(std::move(region_label));
}
FamilyPtr make_uniform_location_family(double half_width, std::string region_label) {
    return std::make_shared<UniformLocationFamily>(half_width, std::move(region_label));
}
FamilyPtr make_student_t_family(double nu, std::string region_label) {
    return std::make_shared<StudentTFamily>(nu, std::move(region_label));
}

FamilyPtr make_family(const std::string& id,
                      const std::map<std::string, double>& known,
                      std::string region_label) {
    auto constant = [&](const char* name) {
        auto it = known.find(name);
        if (it == known.end()) {
            throw ConfigError("family '" + id + "' requires the constant '" + name + "'");
        }
        return it->second;
    };
    if (id == "normal") {
        return region_label.empty() ? make_normal_family()
                                    : make_normal_family(std::move(region_label));
    }
    if (id == "lognormal") {
        return region_label.empty() ? make_lognormal_family()
                                    : make_lognormal_family(std::move(region_label));
    }
    if (id == "gamma") {
        return region_label.empty() ? make_gamma_family()
                                    : make_gamma_family(std::move(region_label));
    }
    if (id == "uniform_loc") {
        const double a = constant("a");
        return region_label.empty()
                   ? make_uniform_location_family(a)
                   : make_uniform_location_family(a, std::move(region_label));
    }
    if (id == "student_t") {
        const double nu = constant("nu");
        return region_label.empty() ? make_student_t_family(nu)
                                    : make_student_t_family(nu, std::move(region_label));
    }
    throw ConfigError("unknown family id '" + id + "'");
}

// ---------------------------------------------------------------------------
// Adapters
// ---------------------------------------------------------------------------

namespace {

class FixedComponentFamily final : public Family {
public:
    FixedComponentFamily(FamilyPtr base, std::vector<std::size_t> pinned_idx,
                         std::vector<double> pinned_val,
                         std::vector<ComponentSpec> free_comps)
        : Family(base->id(), base->display_name(), std::move(free_comps),
                 base->region_label()),
          base_(std::move(base)),
          pinned_idx_(std::move(pinned_idx)),
          pinned_val_(std::move(pinned_val)) {
        free_idx_.reserve(base_->dim() - pinned_idx_.size());
        for (std::size_t i = 0; i < base_->dim(); ++i) {
            if (std::find(pinned_idx_.begin(), pinned_idx_.end(), i) == pinned_idx_.end()) {
                free_idx_.push_back(i);
            }
        }
    }

    ParamVector merge(const ParamVector& free) const {
        ParamVector full(std::vector<double>(base_->dim()));
        for (std::size_t k = 0; k < pinned_idx_.size(); ++k) {
            full[pinned_idx_[k]] = pinned_val_[k];
        }
        for (std::size_t k = 0; k < free_idx_.size(); ++k) {
            full[free_idx_[k]] = free[k];
        }
        return full;
    }

    double log_density(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        return base_->log_density(merge(t), y);
    }
    double cdf(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        return base_->cdf(merge(t), y);
    }
    double quantile(const ParamVector& t, double p) const override {
        require_in_bounds(t);
        return base_->quantile(merge(t), p);
    }
    Interval support(const ParamVector& t) const override {
        return base_->support(merge(t));
    }
    Moments params_to_moments(const ParamVector& t) const override {
        require_in_bounds(t);
        return base_->params_to_moments(merge(t));
    }
    ParamVector moments_to_params(double mean, double variance) const override {
        const ParamVector full = base_->moments_to_params(mean, variance);
        for (std::size_t k = 0; k < pinned_idx_.size(); ++k) {
            const double want = pinned_val_[k];
            const double got = full[pinned_idx_[k]];
            if (std::abs(got - want) > 1e-9 * std::max(1.0, std::abs(want))) {
                throw MomentDomainError(
                    id() + ": requested moments conflict with a pinned component");
            }
        }
        std::vector<double> free(free_idx_.size());
        for (std::size_t k = 0; k < free_idx_.size(); ++k) free[k] = full[free_idx_[k]];
        return ParamVector(std::move(free));
    }
    std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& d) const override;

private:
    FamilyPtr base_;
    std::vector<std::size_t> pinned_idx_;
    std::vector<double> pinned_val_;
    std::vector<std::size_t> free_idx_;

    friend class FixedComponentLogLik;
};

class FixedComponentLogLik final : public LogLikelihood {
public:
    FixedComponentLogLik(const FixedComponentFamily& fam, const Dataset& d)
        : fam_(fam), base_ll_(fam.base_->make_log_likelihood(d)) {}
    double operator()(const ParamVector& t) const override {
        return (*base_ll_)(fam_.merge(t));
    }

private:
    const FixedComponentFamily& fam_;
    std::unique_ptr<LogLikelihood> base_ll_;
};

std::unique_ptr<LogLikelihood> FixedComponentFamily::make_log_likelihood(
    const Dataset& d) const {
    return std::make_unique<FixedComponentLogLik>(*this, d);
}

class MomentParametrizedFamily final : public Family {
public:
    explicit MomentParametrizedFamily(FamilyPtr base)
        : Family(base->id() + "_mv", base->display_name() + " (mean-variance)",
                 {{"mean", base->moment_domain().mean},
                  {"variance", base->moment_domain().variance}},
                 base->region_label()),
          base_(std::move(base)) {}

    ParamVector to_base(const ParamVector& mv) const {
        return base_->moments_to_params(mv[0], mv[1]);
    }

    double log_density(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        return base_->log_density(to_base(t), y);
    }
    double cdf(const ParamVector& t, double y) const override {
        require_in_bounds(t);
        return base_->cdf(to_base(t), y);
    }
    double quantile(const ParamVector& t, double p) const override {
        require_in_bounds(t);
        return base_->quantile(to_base(t), p);
    }
    Interval support(const ParamVector& t) const override {
        return base_->support(to_base(t));
    }
    Moments params_to_moments(const ParamVector& t) const override {
        require_in_bounds(t);
        return {t[0], t[1]};
    }
    bool has_moment_parametrization() const noexcept override { return true; }
    MomentDomain moment_domain() const override { return base_->moment_domain(); }
    ParamVector moments_to_params(double mean, double variance) const override {
        ParamVector mv{mean, variance};
        require_in_bounds(mv);
        return mv;
    }
    std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& d) const override;

private:
    FamilyPtr base_;

    friend class MomentLogLik;
};

class MomentLogLik final : public LogLikelihood {
public:
    MomentLogLik(const MomentParametrizedFamily& fam, const Dataset& d)
        : fam_(fam), base_ll_(fam.base_->make_log_likelihood(d)) {}
    double operator()(const ParamVector& mv) const override {
        return (*base_ll_)(fam_.to_base(mv));
    }

private:
    const MomentParametrizedFamily& fam_;
    std::unique_ptr<LogLikelihood> base_ll_;
};

std::unique_ptr<LogLikelihood> MomentParametrizedFamily::make_log_likelihood(
    const Dataset& d) const {
    return std::make_unique<MomentLogLik>(*this, d);
}

} // namespace

FamilyPtr fix_components(FamilyPtr base,
                         const std::vector<std::pair<std::string, double>>& pinned) {
    if (pinned.empty()) return base;
    std::vector<std::size_t> idx;
    std::vector<double> val;
    for (const auto& [name, value] : pinned) {
        const std::ptrdiff_t i = base->component_index(name);
        if (i < 0) {
            throw ConfigError(base->id() + ": no component named '" + name + "'");
        }
        if (!std::isfinite(value) ||
            !base->components()[static_cast<std::size_t>(i)].bound.contains(value)) {
            throw ParameterDomainError(base->id() + ": fixed value for '" + name +
                                       "' violates its bound");
        }
        if (std::find(idx.begin(), idx.end(), static_cast<std::size_t>(i)) != idx.end()) {
            throw ConfigError(base->id() + ": component '" + name + "' fixed twice");
        }
        idx.push_back(static_cast<std::size_t>(i));
        val.push_back(value);
    }
    if (idx.size() >= base->dim()) {
        throw ConfigError(base->id() + ": at least one component must stay free");
    }
    std::vector<ComponentSpec> free_comps;
    for (std::size_t i = 0; i < base->dim(); ++i) {
        if (std::find(idx.begin(), idx.end(), i) == idx.end()) {
            free_comps.push_back(base->components()[i]);
        }
    }
    return std::make_shared<FixedComponentFamily>(std::move(base), std::move(idx),
                                                  std::move(val), std::move(free_comps));
}

FamilyPtr moment_parametrized(FamilyPtr base) {
    if (!base->has_moment_parametrization()) {
        throw UnsupportedComparisonError(
            base->id() + ": family is not specified by (mean, variance)");
    }
    return std::make_shared<MomentParametrizedFamily>(std::move(base));
}

namespace {

class RenamedFamily final : public Family {
public:
    RenamedFamily(FamilyPtr base, std::string id)
        : Family(std::move(id), base->display_name(), base->components(),
                 base->region_label()),
          base_(std::move(base)) {}

    double log_density(const ParamVector& t, double y) const override {
        return base_->log_density(t, y);
    }
    double cdf(const ParamVector& t, double y) const override {
        return base_->cdf(t, y);
    }
    double quantile(const ParamVector& t, double p) const override {
        return base_->quantile(t, p);
    }
    Interval support(const ParamVector& t) const override { return base_->support(t); }
    Moments params_to_moments(const ParamVector& t) const override {
        return base_->params_to_moments(t);
    }
    bool has_moment_parametrization() const noexcept override {
        return base_->has_moment_parametrization();
    }
    MomentDomain moment_domain() const override { return base_->moment_domain(); }
    ParamVector moments_to_params(double mean, double variance) const override {
        return base_->moments_to_params(mean, variance);
    }
    Dataset sample(const ParamVector& t, std::size_t n, std::uint64_t seed) const override {
        return base_->sample(t, n, seed);
    }
    std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& d) const override {
        return base_->make_log_likelihood(d);
    }

private:
    FamilyPtr base_;
};

} // namespace

FamilyPtr rename_family(FamilyPtr base, std::string id) {
    if (base->id() == id) return base;
    return std::make_shared<RenamedFamily>(std::move(base), std::move(id));
}

} // namespace openpop
