#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsdelab/table.hpp"

namespace bsdelab {

const std::vector<std::string>& experiment_kinds();

// Fully resolved experiment configuration: per-kind defaults, overlaid with
// an optional JSON config document, overlaid with CLI flag overrides.
struct ExperimentConfig {
    std::string kind;
    nlohmann::ordered_json values;

    // throws std::invalid_argument on any precondition violation; called
    // before any computation starts
    void validate() const;

    double model(const char* field) const { return values.at("model").at(field).get<double>(); }
    std::uint64_t seed() const { return values.at("numerics").at("seed").get<std::uint64_t>(); }
};

ExperimentConfig make_config(const std::string& kind,
                             const nlohmann::json& overrides = nlohmann::json::object());
ExperimentConfig load_config_file(const std::string& kind, const std::string& path);

// Runs the experiment and assembles its table. Property violations are
// recorded in table.invariant_failure rather than thrown, so artifacts are
// always written.
ResultTable run_experiment(const ExperimentConfig& config);

}  // namespace bsdelab
