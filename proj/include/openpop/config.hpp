#ifndef OPENPOP_CONFIG_HPP
#define OPENPOP_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "openpop/dataset.hpp"
#include "openpop/diagnostics.hpp"
#include "openpop/inference.hpp"
#include "openpop/modelspace.hpp"
#include "openpop/quantity.hpp"
#include "openpop/simulate.hpp"

namespace openpop {

struct PValueConfig {
    std::string family_id;
    TestStatistic statistic = TestStatistic::sample_mean;
};

struct UniformDemoConfig {
    double half_width = 1.0;
    double y = 0.0;
    double prior_null_prob = 0.5;
    int grid_points = 81;
    double span = 2.0;
};

struct SensitivityConfig {
    std::string family_i;
    std::string family_istar;
    double threshold = 0.1;
    PriorSpec moment_prior; // components: mean, variance
};

struct SimulateConfig {
    TrueDistSpec truth;
    std::size_t reps = 100;
    std::optional<std::size_t> n;
    std::vector<std::size_t> n_schedule; // weight-concentration mode when nonempty
    double level = 0.9;
    std::optional<QuantitySpec> quantity;
};

/// Parsed run configuration. `raw` keeps the document as read so the report
/// can fingerprint exactly what the user supplied.
struct AppConfig {
    nlohmann::json raw;
    std::uint64_t fingerprint = 0;
    std::optional<std::uint64_t> seed;
    std::optional<Dataset> data;
    FitSettings settings;
    std::optional<PopulationSpaceModel> model;
    std::optional<RatioElicitation> elicitation;
    std::optional<QuantitySpec> quantity;
    double level = 0.95;
    std::optional<PValueConfig> pvalue;
    std::optional<UniformDemoConfig> uniform_demo;
    std::optional<SensitivityConfig> sensitivity;
    std::optional<SimulateConfig> simulate;
};

/// Reads and validates a config file. Error messages carry the offending
/// config path (JSON pointer or file:line).
AppConfig load_config(const std::string& path);

/// Parses an already-loaded document; `base_dir` anchors relative data paths.
AppConfig parse_config(const nlohmann::json& doc, const std::string& base_dir);

/// Reads a one-column CSV of numbers (optional single header line).
std::vector<double> read_csv_column(const std::string& path);

} // namespace openpop

#endif // OPENPOP_CONFIG_HPP
