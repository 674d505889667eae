#include "openpop/cli.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "openpop/config.hpp"
#include "openpop/diagnostics.hpp"
#include "openpop/errors.hpp"
#include "openpop/pipeline.hpp"
#include "openpop/report.hpp"
#include "openpop/simulate.hpp"
#include "openpop/version.hpp"

namespace openpop {

namespace {

using nlohmann::json;

json json_double(double v) {
    // Canonical writer renders non-finite doubles as strings; keep the type
    // uniform here.
    return json(v);
}

struct Options {
    std::string command;
    std::string config_path;
    std::string out_path = "report.json";
    std::string quantity;
    double level = -1.0;
    std::string density_csv;
    std::string rows_csv;
    std::string source = "predictive";
    std::string anchor;
    std::string family;
    std::string statistic;
};

struct RunContext {
    AppConfig cfg;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
    QuantitySpec quantity;
    double level = 0.95;
};

QuantitySpec resolve_quantity(const Options& opt, const AppConfig& cfg) {
    if (!opt.quantity.empty()) return QuantitySpec::parse(opt.quantity);
    if (cfg.quantity) return *cfg.quantity;
    return QuantitySpec{}; // mean
}

double resolve_level(const Options& opt, const AppConfig& cfg) {
    if (opt.level > 0.0) {
        if (!(opt.level < 1.0)) throw ConfigError("--level must lie in (0,1)");
        return opt.level;
    }
    return cfg.level;
}

json families_block(const PopulationSpaceModel& model, const PipelineResult* res) {
    json arr = json::array();
    for (std::size_t i = 0; i < model.size(); ++i) {
        const ModelEntry& e = model.entry(i);
        json f;
        f["id"] = e.family->id();
        f["display_name"] = e.family->display_name();
        f["region_label"] = e.family->region_label();
        f["prior"] = json_double(e.prior_weight);
        if (res) {
            const FamilyFit& fit = res->fits[i];
            f["log_predictive"] = json_double(fit.log_predictive);
            f["weight"] = json_double(res->weights.weights[i]);
            f["excluded_by_data"] = static_cast<bool>(res->weights.excluded_by_data[i]);
            if (!fit.posterior.nodes.empty()) {
                f["log_marginal_likelihood"] =
                    json_double(fit.posterior.log_normalizing_constant);
                json comps = json::array();
                for (std::size_t j = 0; j < e.family->dim(); ++j) {
                    std::vector<double> vals(fit.posterior.nodes.size());
                    for (std::size_t k = 0; k < vals.size(); ++k) {
                        vals[k] = fit.posterior.nodes[k][j];
                    }
                    const auto m = weighted_moments(vals, fit.posterior.masses);
                    json c;
                    c["name"] = e.family->components()[j].name;
                    c["posterior_mean"] = json_double(m.mean);
                    c["posterior_sd"] = json_double(std::sqrt(std::max(m.variance, 0.0)));
                    comps.push_back(std::move(c));
                }
                f["posterior"] = std::move(comps);
            }
        }
        arr.push_back(std::move(f));
    }
    return arr;
}

json summary_block(const MixturePosterior& mix, const QuantitySpec& q, double level) {
    const QuantitySummary s = summarize(mix, level, 0); // table emitted separately
    json out;
    out["quantity"] = q.str();
    out["level"] = json_double(level);
    out["mean"] = json_double(s.mean);
    out["interval_lo"] = json_double(s.interval.lo);
    out["interval_hi"] = json_double(s.interval.hi);
    json per = json::array();
    for (std::size_t i = 0; i < mix.per_family().size(); ++i) {
        json e;
        e["weight"] = json_double(mix.weights()[i]);
        if (mix.weights()[i] > 0.0 && mix.per_family()[i].size() > 0) {
            e["mean"] = json_double(mix.per_family()[i].mean());
        }
        per.push_back(std::move(e));
    }
    out["per_family"] = std::move(per);
    return out;
}

void write_density_csv(const std::string& path, const MixturePosterior& mix,
                       std::size_t points) {
    const DensityTable t = mix.density_table(points);
    std::string out = "q,density,cdf\n";
    for (std::size_t j = 0; j < t.q.size(); ++j) {
        out += format_double(t.q[j]);
        out.push_back(',');
        out += format_double(t.density[j]);
        out.push_back(',');
        out += format_double(t.cdf[j]);
        out.push_back('\n');
    }
    write_text_file(path, out);
}

const PopulationSpaceModel& require_model(const RunContext& ctx) {
    if (!ctx.cfg.model) throw ConfigError("this command needs a 'model' section");
    return *ctx.cfg.model;
}

const Dataset& require_data(const RunContext& ctx) {
    if (!ctx.cfg.data) throw ConfigError("this command needs a 'data' section");
    return *ctx.cfg.data;
}

// Shared pipeline envelope for commands that see data through the model.
struct PipelineRun {
    PipelineResult result;
    std::optional<MixturePosterior> mixture;
};

PipelineRun run_pipeline_block(RunContext& ctx, json& report) {
    const PopulationSpaceModel& model = require_model(ctx);
    const Dataset& data = require_data(ctx);
    PipelineRun run;
    run.result = fit_and_weigh(model, data, ctx.cfg.settings);
    report["families"] = families_block(model, &run.result);
    std::vector<ConditionalPosterior> posts;
    posts.reserve(model.size());
    for (const auto& f : run.result.fits) posts.push_back(f.posterior);
    run.mixture.emplace(
        mixture_posterior(model, run.result.weights, posts, ctx.quantity));
    report["quantity_summary"] = summary_block(*run.mixture, ctx.quantity, ctx.level);
    report["n"] = data.n();
    return run;
}

int cmd_fit(RunContext& ctx, const Options& opt, json& report) {
    (void)opt;
    run_pipeline_block(ctx, report);
    return 0;
}

int cmd_weights(RunContext& ctx, const Options& opt, json& report) {
    const PopulationSpaceModel& model = require_model(ctx);
    PipelineRun run = run_pipeline_block(ctx, report);

    ModelWeights chosen = run.result.weights;
    std::string source = opt.source;
    if (source == "elicited") {
        if (!ctx.cfg.elicitation) {
            throw ConfigError("--source elicited needs an 'elicitation' section");
        }
        chosen = weights_from_ratios(model, *ctx.cfg.elicitation);
        json el;
        el["anchor"] = ctx.cfg.elicitation->anchor_id;
        el["notes"] = ctx.cfg.elicitation->notes;
        report["elicitation"] = std::move(el);
    } else if (source == "prior-rule") {
        std::string anchor = opt.anchor;
        if (anchor.empty() && ctx.cfg.elicitation) anchor = ctx.cfg.elicitation->anchor_id;
        if (anchor.empty()) anchor = model.entry(0).family->id();
        chosen = weights_from_ratios(model, apply_prior_ratio_rule(model, anchor));
        report["anchor"] = anchor;
    } else if (source != "predictive") {
        throw ConfigError("--source must be predictive|elicited|prior-rule");
    }
    report["weights_source"] = source;
    json w = json::array();
    for (double v : chosen.weights) w.push_back(json_double(v));
    report["weights"] = std::move(w);

    std::cout << "weights (" << source << "):";
    for (std::size_t i = 0; i < model.size(); ++i) {
        std::cout << " " << model.entry(i).family->id() << "=" << chosen.weights[i];
    }
    std::cout << "\n";
    return 0;
}

int cmd_quantity(RunContext& ctx, const Options& opt, json& report) {
    PipelineRun run = run_pipeline_block(ctx, report);
    if (!opt.density_csv.empty()) {
        write_density_csv(opt.density_csv, *run.mixture, 512);
    }
    const CredibleInterval ci = run.mixture->interval(ctx.level);
    std::cout << ctx.quantity.str() << ": mean=" << run.mixture->mean() << " "
              << ctx.level * 100 << "% interval=[" << ci.lo << ", " << ci.hi << "]\n";
    return 0;
}

int cmd_pvalue(RunContext& ctx, const Options& opt, json& report) {
    json diag;

    if (ctx.cfg.uniform_demo) {
        const UniformDemoConfig& u = *ctx.cfg.uniform_demo;
        const UniformDemoRecord rec =
            uniform_demo(u.half_width, u.y, u.prior_null_prob, u.grid_points, u.span);
        json d;
        d["a"] = json_double(rec.half_width);
        d["y"] = json_double(rec.y);
        d["prior_null_prob"] = json_double(rec.prior_null_prob);
        d["support_excluded"] = rec.support_excluded;
        d["p_two_sided"] = json_double(rec.p_two_sided);
        d["null_density_at_y"] = json_double(rec.null_density_at_y);
        d["max_density_height"] = json_double(rec.max_density_height);
        d["density_at_max_height"] = rec.density_at_max_height;
        d["max_likelihood_ratio"] = json_double(rec.max_likelihood_ratio);
        json grid = json::array();
        for (std::size_t k = 0; k < rec.theta_grid.size(); ++k) {
            json row;
            row["theta"] = json_double(rec.theta_grid[k]);
            row["likelihood_ratio"] = json_double(rec.likelihood_ratio[k]);
            grid.push_back(std::move(row));
        }
        d["likelihood_ratio_grid"] = std::move(grid);
        diag["uniform_demo"] = std::move(d);
        std::cout << "uniform demo: p=" << rec.p_two_sided
                  << " density_at_max_height=" << (rec.density_at_max_height ? "yes" : "no")
                  << "\n";
    }

    std::string family_id = opt.family;
    if (family_id.empty() && ctx.cfg.pvalue) family_id = ctx.cfg.pvalue->family_id;
    if (!family_id.empty()) {
        const PopulationSpaceModel& model = require_model(ctx);
        PipelineRun run = run_pipeline_block(ctx, report);
        const std::ptrdiff_t idx = model.index_of(family_id);
        if (idx < 0) {
            throw ConfigError("pvalue: family '" + family_id + "' is not in the model");
        }
        TestStatistic stat = TestStatistic::sample_mean;
        if (!opt.statistic.empty()) {
            stat = parse_statistic(opt.statistic);
        } else if (ctx.cfg.pvalue) {
            stat = ctx.cfg.pvalue->statistic;
        }
        const auto i = static_cast<std::size_t>(idx);
        if (run.result.weights.excluded_by_data[i]) {
            throw DegenerateFitError("pvalue: family '" + family_id +
                                     "' is excluded by the data");
        }
        const PValueReport rep = weighted_pvalue(*model.entry(i).family,
                                                 run.result.fits[i].posterior,
                                                 require_data(ctx), stat);
        json p;
        p["family"] = family_id;
        p["statistic"] = to_string(rep.statistic);
        p["lambda"] = json_double(rep.lambda);
        p["nodes"] = rep.nodes.size();
        if (rep.nodes.size() <= 64) {
            json tablej = json::array();
            for (std::size_t k = 0; k < rep.nodes.size(); ++k) {
                json row;
                json theta = json::array();
                for (double t : rep.nodes[k].values) theta.push_back(json_double(t));
                row["theta"] = std::move(theta);
                row["alpha"] = json_double(rep.alphas[k]);
                row["weight"] = json_double(rep.weights[k]);
                tablej.push_back(std::move(row));
            }
            p["table"] = std::move(tablej);
        }
        diag["pvalue"] = std::move(p);
        std::cout << "weighted p value (" << family_id << ", " << to_string(stat)
                  << "): lambda=" << rep.lambda << "\n";
    }

    if (diag.empty()) {
        throw ConfigError(
            "pvalue: provide --family (or a 'pvalue' section) or a 'uniform_demo' section");
    }
    report["diagnostics"] = std::move(diag);
    return 0;
}

int cmd_sensitivity(RunContext& ctx, const Options& opt, json& report) {
    (void)opt;
    if (!ctx.cfg.sensitivity) {
        throw ConfigError("sensitivity: config needs a 'sensitivity' section");
    }
    const SensitivityConfig& sc = *ctx.cfg.sensitivity;
    const PopulationSpaceModel& model = require_model(ctx);
    run_pipeline_block(ctx, report);

    const SensitivityReport rep =
        sensitivity_compare(model, sc.family_i, sc.family_istar, ctx.quantity,
                            require_data(ctx), sc.moment_prior, sc.threshold,
                            ctx.cfg.settings);
    json d;
    d["family_i"] = rep.family_i;
    d["family_istar"] = rep.family_istar;
    d["quantity"] = rep.quantity.str();
    d["ks_distance"] = json_double(rep.ks_distance);
    d["overlap_coefficient"] = json_double(rep.overlap_coefficient);
    d["joint_sup_abs"] = json_double(rep.joint_sup_abs);
    d["joint_sup_rel"] = json_double(rep.joint_sup_rel);
    d["threshold"] = json_double(rep.threshold);
    d["verdict"] = rep.enlarge_model ? "enlarge-model" : "adequate";
    d["suggested_addition"] = rep.suggested_config;
    report["diagnostics"]["sensitivity"] = std::move(d);

    std::cout << "sensitivity " << rep.family_i << " vs " << rep.family_istar << " ("
              << rep.quantity.str() << "): KS=" << rep.ks_distance << " -> "
              << (rep.enlarge_model ? "enlarge-model" : "adequate") << "\n";
    return 0;
}

int cmd_simulate(RunContext& ctx, const Options& opt, json& report) {
    if (!ctx.cfg.simulate) {
        throw ConfigError("simulate: config needs a 'simulate' section");
    }
    if (!ctx.cfg.seed) {
        throw ConfigError("simulate: a top-level seed is required");
    }
    const SimulateConfig& sim = *ctx.cfg.simulate;
    const PopulationSpaceModel& model = require_model(ctx);
    report["families"] = families_block(model, nullptr);
    const QuantitySpec q = sim.quantity ? *sim.quantity : ctx.quantity;

    if (!sim.n_schedule.empty()) {
        const auto rows = weight_concentration_experiment(
            model, sim.truth, sim.n_schedule, sim.reps, ctx.seed, ctx.cfg.settings);
        json table = json::array();
        std::string csv = "n,degenerate";
        for (std::size_t i = 0; i < model.size(); ++i) {
            csv += ",mean_w_" + model.entry(i).family->id();
        }
        csv += "\n";
        for (const auto& row : rows) {
            json r;
            r["n"] = row.n;
            r["degenerate"] = row.degenerate_count;
            json w = json::array();
            for (double v : row.mean_weights) w.push_back(json_double(v));
            r["mean_weights"] = std::move(w);
            table.push_back(std::move(r));
            csv += std::to_string(row.n) + "," + std::to_string(row.degenerate_count);
            for (double v : row.mean_weights) csv += "," + format_double(v);
            csv += "\n";
        }
        report["weight_concentration"] = std::move(table);
        report["reps"] = sim.reps;
        if (!opt.rows_csv.empty()) {
            write_text_file(opt.rows_csv, csv);
        }
        std::cout << "weight concentration over n schedule written\n";
        return 0;
    }

    const CoverageTable table = run_coverage_experiment(
        model, q, sim.truth, *sim.n, sim.reps, sim.level, ctx.seed, ctx.cfg.settings);

    json s;
    s["quantity"] = q.str();
    s["level"] = json_double(table.level);
    s["n"] = table.n;
    s["reps"] = table.reps;
    s["true_value"] = json_double(table.true_value);
    s["true_value_by_monte_carlo"] = table.true_value_by_mc;
    s["degenerate"] = table.degenerate_count;
    s["mixture_coverage"] = json_double(table.mixture_coverage);
    s["mixture_se"] = json_double(table.mixture_se);
    json singles = json::array();
    for (std::size_t i = 0; i < model.size(); ++i) {
        json e;
        e["id"] = model.entry(i).family->id();
        e["coverage"] = json_double(table.single_coverage[i]);
        e["se"] = json_double(table.single_se[i]);
        e["mean_weight"] = json_double(table.mean_weights[i]);
        singles.push_back(std::move(e));
    }
    s["single_family"] = std::move(singles);
    report["coverage"] = std::move(s);

    if (!opt.rows_csv.empty()) {
        std::string csv = "rep,degenerate,covered,interval_lo,interval_hi";
        for (std::size_t i = 0; i < model.size(); ++i) {
            csv += ",w_" + model.entry(i).family->id();
        }
        for (std::size_t i = 0; i < model.size(); ++i) {
            csv += ",single_cov_" + model.entry(i).family->id();
        }
        csv += "\n";
        for (const auto& row : table.rows) {
            csv += std::to_string(row.rep);
            csv += row.degenerate ? ",1" : ",0";
            csv += row.covered ? ",1" : ",0";
            csv += "," + format_double(row.interval_lo);
            csv += "," + format_double(row.interval_hi);
            for (double w : row.weights) csv += "," + format_double(w);
            for (bool c : row.single_covered) csv += c ? ",1" : ",0";
            csv += "\n";
        }
        write_text_file(opt.rows_csv, csv);
    }

    std::cout << "coverage: mixture=" << table.mixture_coverage << " (se "
              << table.mixture_se << ", " << table.degenerate_count
              << " degenerate reps)\n";
    return 0;
}

int dispatch(const Options& opt) {
    RunContext ctx;
    ctx.cfg = load_config(opt.config_path);
    if (ctx.cfg.seed) {
        ctx.seed = *ctx.cfg.seed;
    } else {
        ctx.seed = 0;
        ctx.warnings.push_back("seed absent; defaulted to 0");
    }
    ctx.quantity = resolve_quantity(opt, ctx.cfg);
    ctx.level = resolve_level(opt, ctx.cfg);

    json report;
    report["schema"] = kReportSchema;
    report["tool_version"] = kVersion;
    report["command"] = opt.command;
    report["config_fingerprint"] = to_hex(ctx.cfg.fingerprint);
    report["seed"] = ctx.seed;

    int rc = 0;
    if (opt.command == "fit") {
        rc = cmd_fit(ctx, opt, report);
    } else if (opt.command == "weights") {
        rc = cmd_weights(ctx, opt, report);
    } else if (opt.command == "quantity") {
        rc = cmd_quantity(ctx, opt, report);
    } else if (opt.command == "pvalue") {
        rc = cmd_pvalue(ctx, opt, report);
    } else if (opt.command == "sensitivity") {
        rc = cmd_sensitivity(ctx, opt, report);
    } else if (opt.command == "simulate") {
        rc = cmd_simulate(ctx, opt, report);
    } else {
        throw ConfigError("unknown command '" + opt.command + "'");
    }

    json warn = json::array();
    for (const auto& w : ctx.warnings) warn.push_back(w);
    report["warnings"] = std::move(warn);

    write_text_file(opt.out_path, canonical_json(report));
    std::cout << "report written to " << opt.out_path << "\n";
    return rc;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"population-space mixture inference"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "config JSON path")->required();
        sub->add_option("--out", opt.out_path, "report JSON path");
        sub->add_option("--quantity", opt.quantity,
                        "mean|variance|sd|quantile:<p>|tailprob:<t>|expect:<fn>");
        sub->add_option("--level", opt.level, "credible level in (0,1)");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit per-family posteriors");
    add_common(fit);
    CLI::App* weights = app.add_subcommand("weights", "post-data model weights");
    add_common(weights);
    weights->add_option("--source", opt.source, "predictive|elicited|prior-rule");
    weights->add_option("--anchor", opt.anchor, "anchor family for prior-rule");
    CLI::App* quantity = app.add_subcommand("quantity", "post-data quantity mixture");
    add_common(quantity);
    quantity->add_option("--density-csv", opt.density_csv, "write density table CSV");
    CLI::App* pvalue = app.add_subcommand("pvalue", "weighted P value diagnostics");
    add_common(pvalue);
    pvalue->add_option("--family", opt.family, "family id for the weighted P value");
    pvalue->add_option("--statistic", opt.statistic, "obs_value|sample_mean");
    CLI::App* sensitivity =
        app.add_subcommand("sensitivity", "family-substitution sensitivity check");
    add_common(sensitivity);
    CLI::App* simulate = app.add_subcommand("simulate", "open-space simulation harness");
    add_common(simulate);
    simulate->add_option("--csv", opt.rows_csv, "write per-rep rows CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    opt.command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(opt);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IncompleteElicitationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedComparisonError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateFitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NoAdmissibleFamilyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace openpop
