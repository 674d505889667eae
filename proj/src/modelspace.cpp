#include "openpop/modelspace.hpp"

#include <cmath>
#include <set>

#include "openpop/errors.hpp"
#include "openpop/numerics.hpp"

namespace openpop {

PopulationSpaceModel::PopulationSpaceModel(std::vector<ModelEntry> entries)
    : entries_(std::move(entries)) {
    if (entries_.empty()) {
        throw ConfigError("model: at least one family is required");
    }
    std::set<std::string> ids;
    for (const auto& e : entries_) {
        if (!e.family) throw ConfigError("model: null family");
        if (!ids.insert(e.family->id()).second) {
            throw ConfigError("model: duplicate family id '" + e.family->id() + "'");
        }
        if (!(e.prior_weight > 0.0) || !std::isfinite(e.prior_weight)) {
            throw ConfigError("model: prior weight for '" + e.family->id() +
                              "' must be strictly positive");
        }
        validate_prior_for(*e.family, e.prior);
    }
    std::vector<double> priors = prior_weights();
    if (std::abs(compensated_sum(priors) - 1.0) > 1e-12) {
        throw ConfigError("model: prior weights must sum to 1");
    }
}

std::ptrdiff_t PopulationSpaceModel::index_of(const std::string& id) const noexcept {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].family->id() == id) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
}

std::vector<double> PopulationSpaceModel::prior_weights() const {
    std::vector<double> w;
    w.reserve(entries_.size());
    for (const auto& e : entries_) w.push_back(e.prior_weight);
    return w;
}

void ModelWeights::validate() const {
    for (double w : weights) {
        if (!(w >= 0.0)) throw MisuseError("weights: negative entry");
    }
    if (std::abs(compensated_sum(weights) - 1.0) > 1e-12) {
        throw MisuseError("weights: entries do not sum to 1");
    }
}

ModelWeights weights_from_predictive(const PopulationSpaceModel& model,
                                     std::span<const double> log_predictives) {
    const std::size_t m = model.size();
    if (log_predictives.size() != m) {
        throw MisuseError("weights_from_predictive: one log predictive per family required");
    }
    for (double lp : log_predictives) {
        if (std::isnan(lp) || lp == kPosInf) {
            throw MisuseError("weights_from_predictive: log predictives must be finite or -inf");
        }
    }

    // Max-shifted so that a common offset in the log predictives cancels.
    std::vector<double> score(m, kNegInf);
    double peak = kNegInf;
    for (std::size_t i = 0; i < m; ++i) {
        if (log_predictives[i] == kNegInf) continue;
        score[i] = std::log(model.entry(i).prior_weight) + log_predictives[i];
        peak = std::max(peak, score[i]);
    }
    if (peak == kNegInf) {
        throw NoAdmissibleFamilyError(
            "every family in the model gives the data zero predictive density");
    }

    ModelWeights out;
    out.provenance = WeightProvenance::predictive;
    out.weights.resize(m, 0.0);
    out.excluded_by_data.resize(m, false);
    std::vector<double> expv(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (score[i] == kNegInf) {
            out.excluded_by_data[i] = true;
        } else {
            expv[i] = std::exp(score[i] - peak);
        }
    }
    const double total = compensated_sum(expv);
    for (std::size_t i = 0; i < m; ++i) {
        out.weights[i] = expv[i] / total;
    }
    return out;
}

void RatioElicitation::validate() const {
    if (anchor_id.empty()) {
        throw ConfigError("elicitation: anchor family id is required");
    }
    for (const auto& [id, r] : ratios) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw ConfigError("elicitation: ratio for '" + id +
                              "' must be finite and > 0");
        }
    }
}

ModelWeights weights_from_ratios(const PopulationSpaceModel& model,
                                 const RatioElicitation& elicitation) {
    elicitation.validate();
    const std::ptrdiff_t anchor = model.index_of(elicitation.anchor_id);
    if (anchor < 0) {
        throw ConfigError("elicitation: anchor family '" + elicitation.anchor_id +
                          "' is not in the model");
    }
    if (elicitation.ratios.count(elicitation.anchor_id)) {
        throw ConfigError("elicitation: the anchor family must not carry a ratio");
    }
    for (const auto& [id, r] : elicitation.ratios) {
        (void)r;
        if (model.index_of(id) < 0) {
            throw ConfigError("elicitation: family '" + id + "' is not in the model");
        }
    }

    const std::size_t m = model.size();
    std::vector<double> ratio(m, 1.0); // anchor ratio is 1 by definition
    for (std::size_t i = 0; i < m; ++i) {
        if (static_cast<std::ptrdiff_t>(i) == anchor) continue;
        const auto it = elicitation.ratios.find(model.entry(i).family->id());
        if (it == elicitation.ratios.end()) {
            throw IncompleteElicitationError("elicitation: missing ratio for family '" +
                                             model.entry(i).family->id() + "'");
        }
        ratio[i] = it->second;
    }

    double denom = 1.0; // the anchor's own term
    for (std::size_t i = 0; i < m; ++i) {
        if (static_cast<std::ptrdiff_t>(i) != anchor) denom += ratio[i];
    }

    ModelWeights out;
    out.provenance = WeightProvenance::elicited;
    out.weights.resize(m);
    out.excluded_by_data.assign(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        out.weights[i] = ratio[i] / denom;
    }
    return out;
}

RatioElicitation apply_prior_ratio_rule(const PopulationSpaceModel& model,
                                        const std::string& anchor_id) {
    const std::ptrdiff_t anchor = model.index_of(anchor_id);
    if (anchor < 0) {
        throw ConfigError("prior-ratio rule: anchor family '" + anchor_id +
                          "' is not in the model");
    }
    RatioElicitation e;
    e.anchor_id = anchor_id;
    e.notes = "post-data ratios set to the prior ratios (data judged uninformative "
              "between regions)";
    const double anchor_prior = model.entry(static_cast<std::size_t>(anchor)).prior_weight;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) == anchor) continue;
        e.ratios[model.entry(i).family->id()] =
            model.entry(i).prior_weight / anchor_prior;
    }
    return e;
}

} // namespace openpop
