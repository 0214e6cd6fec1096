// Command-line front end: one experiment per invocation, deterministic CSV
// and JSON artifacts. Exit codes: 0 success, 2 invalid configuration,
// 3 numerical failure, 4 property violation.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bsdelab/core.hpp"
#include "bsdelab/experiments.hpp"
#include "bsdelab/table.hpp"

namespace {

std::string default_output_dir() {
    if (const char* env = std::getenv("BSDELAB_OUT_DIR"); env != nullptr && *env != '\0')
        return env;
    return "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for scalar BSDEs with weakly integrable terminal values"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::optional<std::string> format_override;

    for (const std::string& kind : bsdelab::experiment_kinds()) {
        auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        sub->add_option("--config", config_path, "JSON config document");
        sub->add_option("--seed", seed_override, "override numerics.seed");
        sub->add_option("--out", out_override, "output directory");
        sub->add_option("--format", format_override, "csv, json or both")
            ->check(CLI::IsMember({"csv", "json", "both"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // treat bad invocations as validation failures
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string kind = app.get_subcommands().front()->get_name();
    try {
        bsdelab::ExperimentConfig config =
            config_path ? bsdelab::load_config_file(kind, *config_path)
                        : bsdelab::make_config(kind);
        if (seed_override) config.values["numerics"]["seed"] = *seed_override;
        if (out_override) config.values["output"]["dir"] = *out_override;
        if (format_override) config.values["output"]["format"] = *format_override;
        if (config.values["output"]["dir"].get<std::string>().empty())
            config.values["output"]["dir"] = default_output_dir();

        const auto started = std::chrono::steady_clock::now();
        bsdelab::ResultTable table = bsdelab::run_experiment(config);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
        table.metadata["wall_clock_seconds"] = elapsed.count();

        const auto written =
            bsdelab::write_artifacts(table, config.values["output"]["dir"].get<std::string>(),
                                     config.values["output"]["format"].get<std::string>());
        for (const auto& path : written) std::cout << path.string() << '\n';

        if (table.invariant_failure) {
            std::cerr << "invariant violated: " << *table.invariant_failure << '\n';
            return 4;
        }
        return 0;
    } catch (const bsdelab::invariant_violation& e) {
        std::cerr << "invariant violated: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
