#include <algorithm>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "mfhjb/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mfhjb: mean-field HJB numerical toolkit"};
    app.require_subcommand(1);

    std::string config_path, experiment;

    auto* run = app.add_subcommand("run", "run one experiment suite");
    run->add_option("config", config_path, "config file path")->required();
    run->add_option("experiment", experiment, "experiment name (see `list`)")->required();

    auto* validate = app.add_subcommand("validate", "check a config file and exit");
    validate->add_option("config", config_path, "config file path")->required();

    auto* list = app.add_subcommand("list", "print the known experiment names");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& n : mfhjb::experiment_names()) std::cout << n << '\n';
        return 0;
    }

    try {
        mfhjb::ExperimentConfig cfg = mfhjb::ExperimentConfig::load(config_path);
        if (const char* dir = std::getenv("MFHJB_OUTPUT_DIR")) cfg.output_dir = dir;
        if (validate->parsed()) {
            std::cout << "ok (hash " << cfg.hash() << ")\n";
            return 0;
        }
        const auto names = mfhjb::experiment_names();
        if (std::find(names.begin(), names.end(), experiment) == names.end()) {
            std::cerr << "error: unknown experiment '" << experiment << "'\n";
            return 2;
        }
        const int code = mfhjb::run_experiment(cfg, experiment);
        std::cout << experiment << ": " << (code == 0 ? "pass" : "FAIL") << '\n';
        return code;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}
