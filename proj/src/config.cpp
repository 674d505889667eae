#include "openpop/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "openpop/errors.hpp"
#include "openpop/report.hpp"

namespace openpop {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at " + where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        fail(where, std::string("missing required key '") + key + "'");
    }
    return obj.at(key);
}

double require_number(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number()) fail(where + "/" + key, "expected a number");
    return v.get<double>();
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) fail(where + "/" + key, "expected a string");
    return v.get<std::string>();
}

ComponentPrior parse_component_prior(const json& spec, const std::string& where) {
    if (!spec.is_object()) fail(where, "expected an object describing the prior");
    const std::string type = require_string(spec, "type", where);
    ComponentPrior p;
    if (type == "normal") {
        p.kind = ComponentPrior::Kind::normal;
        p.a = require_number(spec, "mean", where);
        p.b = require_number(spec, "sd", where);
    } else if (type == "lognormal") {
        p.kind = ComponentPrior::Kind::lognormal;
        p.a = require_number(spec, "meanlog", where);
        p.b = require_number(spec, "sdlog", where);
    } else if (type == "gamma") {
        p.kind = ComponentPrior::Kind::gamma;
        p.a = require_number(spec, "shape", where);
        p.b = require_number(spec, "scale", where);
    } else if (type == "uniform") {
        p.kind = ComponentPrior::Kind::uniform;
        p.a = require_number(spec, "lo", where);
        p.b = require_number(spec, "hi", where);
    } else if (type == "point") {
        p.kind = ComponentPrior::Kind::point_mass;
        p.a = require_number(spec, "value", where);
    } else {
        fail(where, "unknown prior type '" + type +
                        "' (expected normal|lognormal|gamma|uniform|point)");
    }
    try {
        p.validate();
    } catch (const ConfigError& e) {
        fail(where, e.what());
    }
    return p;
}

std::map<std::string, double> parse_number_map(const json& obj, const std::string& where) {
    std::map<std::string, double> out;
    if (!obj.is_object()) fail(where, "expected an object of name: number pairs");
    for (const auto& [k, v] : obj.items()) {
        if (!v.is_number()) fail(where + "/" + k, "expected a number");
        out[k] = v.get<double>();
    }
    return out;
}

FamilyPtr parse_family(const json& spec, const std::string& where,
                       std::string* out_id = nullptr) {
    const std::string family_id = require_string(spec, "family", where);
    std::map<std::string, double> known;
    if (spec.contains("known")) known = parse_number_map(spec.at("known"), where + "/known");
    std::string region;
    if (spec.contains("region_label")) {
        region = spec.at("region_label").get<std::string>();
    }
    FamilyPtr fam;
    try {
        fam = make_family(family_id, known, region);
        if (spec.contains("fixed")) {
            std::vector<std::pair<std::string, double>> pinned;
            for (const auto& [k, v] : parse_number_map(spec.at("fixed"), where + "/fixed")) {
                pinned.emplace_back(k, v);
            }
            fam = fix_components(fam, pinned);
        }
        const std::string instance_id = spec.value("id", family_id);
        fam = rename_family(fam, instance_id);
        if (out_id) *out_id = instance_id;
    } catch (const ConfigError& e) {
        fail(where, e.what());
    } catch (const ParameterDomainError& e) {
        fail(where, e.what());
    }
    return fam;
}

ParamVector parse_theta(const json& spec, const Family& family, const std::string& where) {
    if (!spec.is_object()) fail(where, "expected an object of component: value pairs");
    ParamVector theta(std::vector<double>(family.dim(), 0.0));
    std::vector<bool> seen(family.dim(), false);
    for (const auto& [k, v] : spec.items()) {
        const std::ptrdiff_t idx = family.component_index(k);
        if (idx < 0) fail(where + "/" + k, "family '" + family.id() + "' has no such component");
        if (!v.is_number()) fail(where + "/" + k, "expected a number");
        theta[static_cast<std::size_t>(idx)] = v.get<double>();
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (std::size_t j = 0; j < family.dim(); ++j) {
        if (!seen[j]) {
            fail(where, "missing component '" + family.components()[j].name + "'");
        }
    }
    try {
        family.require_in_bounds(theta);
    } catch (const ParameterDomainError& e) {
        fail(where, e.what());
    }
    return theta;
}

PriorSpec parse_prior(const json& spec, const Family& family, const std::string& where) {
    if (!spec.is_object()) fail(where, "expected an object of component: prior pairs");
    PriorSpec prior;
    prior.components.resize(family.dim());
    std::vector<bool> seen(family.dim(), false);
    for (const auto& [k, v] : spec.items()) {
        const std::ptrdiff_t idx = family.component_index(k);
        if (idx < 0) {
            fail(where + "/" + k, "family '" + family.id() + "' has no free component '" +
                                      k + "'");
        }
        prior.components[static_cast<std::size_t>(idx)] =
            parse_component_prior(v, where + "/" + k);
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (std::size_t j = 0; j < family.dim(); ++j) {
        if (!seen[j]) {
            fail(where, "missing prior for component '" + family.components()[j].name + "'");
        }
    }
    return prior;
}

PopulationSpaceModel parse_model(const json& spec, const std::string& where) {
    if (!spec.is_array() || spec.empty()) {
        fail(where, "expected a nonempty array of family entries");
    }
    std::vector<ModelEntry> entries;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const std::string here = where + "/" + std::to_string(i);
        const json& e = spec.at(i);
        ModelEntry entry;
        entry.family = parse_family(e, here);
        entry.prior_weight = require_number(e, "prior_weight", here);
        entry.prior = parse_prior(require(e, "prior", here), *entry.family, here + "/prior");
        entries.push_back(std::move(entry));
    }
    try {
        return PopulationSpaceModel(std::move(entries));
    } catch (const ConfigError& e) {
        fail(where, e.what());
    }
}

TrueDistSpec parse_truth(const json& spec, const std::string& where) {
    TrueDistSpec t;
    const std::string kind = require_string(spec, "kind", where);
    if (kind == "family") {
        t.kind = TrueDistSpec::Kind::family;
        t.family = parse_family(spec, where);
        t.theta = parse_theta(require(spec, "theta", where), *t.family, where + "/theta");
    } else if (kind == "normal_mixture") {
        t.kind = TrueDistSpec::Kind::normal_mixture;
        for (const char* key : {"weights", "means", "sds"}) {
            const json& arr = require(spec, key, where);
            if (!arr.is_array()) fail(where + "/" + key, "expected an array of numbers");
            std::vector<double> vals;
            for (const auto& v : arr) {
                if (!v.is_number()) fail(where + "/" + key, "expected numbers");
                vals.push_back(v.get<double>());
            }
            if (key == std::string("weights")) t.mix_weights = vals;
            else if (key == std::string("means")) t.mix_means = vals;
            else t.mix_sds = vals;
        }
    } else if (kind == "contaminated") {
        t.kind = TrueDistSpec::Kind::contaminated;
        const json& base = require(spec, "base", where);
        t.base = parse_family(base, where + "/base");
        t.base_theta =
            parse_theta(require(base, "theta", where + "/base"), *t.base, where + "/base/theta");
        t.fraction = require_number(spec, "fraction", where);
        const json& cont = require(spec, "contaminant", where);
        t.contaminant = parse_family(cont, where + "/contaminant");
        t.contaminant_theta = parse_theta(require(cont, "theta", where + "/contaminant"),
                                          *t.contaminant, where + "/contaminant/theta");
    } else {
        fail(where, "unknown truth kind '" + kind +
                        "' (expected family|normal_mixture|contaminated)");
    }
    try {
        t.validate();
    } catch (const ConfigError& e) {
        fail(where, e.what());
    }
    return t;
}

} // namespace

std::vector<double> read_csv_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open data file");
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip whitespace and trailing commas
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                                 line.back() == '\t' || line.back() == ',')) {
            line.pop_back();
        }
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        const std::string tok = line.substr(start);
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            values.push_back(v);
        } catch (const std::exception&) {
            if (lineno == 1 && values.empty()) continue; // header line
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected a single numeric column, got '" + tok + "'");
        }
    }
    if (values.empty()) {
        throw ConfigError(path + ": no numeric values found");
    }
    return values;
}

AppConfig parse_config(const json& doc, const std::string& base_dir) {
    if (!doc.is_object()) throw ConfigError("config error at /: expected a JSON object");
    AppConfig cfg;
    cfg.raw = doc;
    cfg.fingerprint = config_fingerprint(doc);

    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_integer() || s.get<std::int64_t>() < 0) {
            fail("/seed", "expected a nonnegative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }

    if (doc.contains("settings")) {
        const json& s = doc.at("settings");
        if (!s.is_object()) fail("/settings", "expected an object");
        if (s.contains("grid_nodes")) {
            if (!s.at("grid_nodes").is_number_integer() ||
                s.at("grid_nodes").get<int>() < 3) {
                fail("/settings/grid_nodes", "expected an integer >= 3");
            }
            cfg.settings.grid_nodes = s.at("grid_nodes").get<int>();
        }
        if (s.contains("span_sd")) {
            const double v = s.at("span_sd").get<double>();
            if (!(v > 0.0)) fail("/settings/span_sd", "expected a positive number");
            cfg.settings.span_sd = v;
        }
        if (s.contains("engine")) {
            cfg.settings.engine = s.at("engine").get<std::string>();
        }
    }

    if (doc.contains("data")) {
        const json& d = doc.at("data");
        std::vector<double> values;
        if (d.is_string()) {
            std::string p = d.get<std::string>();
            if (!p.empty() && p.front() != '/' && !base_dir.empty()) {
                p = base_dir + "/" + p;
            }
            values = read_csv_column(p);
        } else if (d.is_array()) {
            for (std::size_t i = 0; i < d.size(); ++i) {
                if (!d.at(i).is_number()) {
                    fail("/data/" + std::to_string(i), "expected a number");
                }
                values.push_back(d.at(i).get<double>());
            }
        } else {
            fail("/data", "expected an inline array or a CSV path");
        }
        try {
            cfg.data.emplace(std::move(values));
        } catch (const Error& e) {
            fail("/data", e.what());
        }
    }

    if (doc.contains("model")) {
        cfg.model.emplace(parse_model(doc.at("model"), "/model"));
    }

    if (doc.contains("elicitation")) {
        const json& e = doc.at("elicitation");
        RatioElicitation r;
        r.anchor_id = require_string(e, "anchor", "/elicitation");
        if (e.contains("ratios")) {
            for (const auto& [k, v] : parse_number_map(e.at("ratios"), "/elicitation/ratios")) {
                r.ratios[k] = v;
            }
        }
        r.notes = e.value("notes", "");
        try {
            r.validate();
        } catch (const ConfigError& ex) {
            fail("/elicitation", ex.what());
        }
        cfg.elicitation = std::move(r);
    }

    if (doc.contains("quantity")) {
        try {
            cfg.quantity = QuantitySpec::parse(doc.at("quantity").get<std::string>());
        } catch (const ConfigError& e) {
            fail("/quantity", e.what());
        }
    }
    if (doc.contains("level")) {
        cfg.level = doc.at("level").get<double>();
        if (!(cfg.level > 0.0) || !(cfg.level < 1.0)) {
            fail("/level", "expected a number in (0,1)");
        }
    }

    if (doc.contains("pvalue")) {
        const json& p = doc.at("pvalue");
        PValueConfig pc;
        pc.family_id = require_string(p, "family", "/pvalue");
        if (p.contains("statistic")) {
            try {
                pc.statistic = parse_statistic(p.at("statistic").get<std::string>());
            } catch (const ConfigError& e) {
                fail("/pvalue/statistic", e.what());
            }
        }
        cfg.pvalue = pc;
    }

    if (doc.contains("uniform_demo")) {
        const json& u = doc.at("uniform_demo");
        UniformDemoConfig ud;
        ud.half_width = require_number(u, "a", "/uniform_demo");
        ud.y = require_number(u, "y", "/uniform_demo");
        ud.prior_null_prob = u.value("prior_null_prob", 0.5);
        ud.grid_points = u.value("grid_points", 81);
        ud.span = u.value("span", 2.0);
        cfg.uniform_demo = ud;
    }

    if (doc.contains("sensitivity")) {
        const json& s = doc.at("sensitivity");
        SensitivityConfig sc;
        sc.family_i = require_string(s, "family_i", "/sensitivity");
        sc.family_istar = require_string(s, "family_istar", "/sensitivity");
        sc.threshold = s.value("threshold", 0.1);
        const json& prior = require(s, "prior", "/sensitivity");
        sc.moment_prior.components.resize(2);
        sc.moment_prior.components[0] =
            parse_component_prior(require(prior, "mean", "/sensitivity/prior"),
                                  "/sensitivity/prior/mean");
        sc.moment_prior.components[1] =
            parse_component_prior(require(prior, "variance", "/sensitivity/prior"),
                                  "/sensitivity/prior/variance");
        cfg.sensitivity = std::move(sc);
    }

    if (doc.contains("simulate")) {
        const json& s = doc.at("simulate");
        SimulateConfig sim;
        sim.truth = parse_truth(require(s, "truth", "/simulate"), "/simulate/truth");
        if (s.contains("reps")) {
            sim.reps = s.at("reps").get<std::size_t>();
        }
        if (s.contains("n")) sim.n = s.at("n").get<std::size_t>();
        if (s.contains("n_schedule")) {
            for (const auto& v : s.at("n_schedule")) {
                sim.n_schedule.push_back(v.get<std::size_t>());
            }
        }
        if (!sim.n && sim.n_schedule.empty()) {
            fail("/simulate", "either n or n_schedule is required");
        }
        if (s.contains("level")) sim.level = s.at("level").get<double>();
        if (!(sim.level > 0.0) || !(sim.level < 1.0)) {
            fail("/simulate/level", "expected a number in (0,1)");
        }
        if (s.contains("quantity")) {
            try {
                sim.quantity = QuantitySpec::parse(s.at("quantity").get<std::string>());
            } catch (const ConfigError& e) {
                fail("/simulate/quantity", e.what());
            }
        }
        cfg.simulate = std::move(sim);
    }

    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // translate the byte offset into a line number
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) {
            if (text[i] == '\n') ++line;
        }
        throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    std::string dir = ".";
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash);
    return parse_config(doc, dir);
}

} // namespace openpop
