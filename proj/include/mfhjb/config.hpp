#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mfhjb {

/// Flat INI-style experiment configuration. Unknown keys are rejected and
/// all values are range-checked before any computation starts.
struct ExperimentConfig {
    // [grid]
    double grid_lower = -8.0;
    double grid_upper = 8.0;
    int grid_n = 513;

    // [weight]
    double blend_inner = 1.0;  // informational; the blend zone is fixed at (1, 2)
    double blend_outer = 2.0;

    // [problem]
    std::string fixture = "pm-drift";  // zero-drift | pm-drift | control-irrelevant | ou
    double sigma = 1.0;
    double horizon = 1.0;
    std::vector<double> atoms{-1.0, 1.0};
    double cost_constant = 0.5;  // running-cost level of the control-irrelevant fixture

    // [search]
    int pieces = 2;
    double dt = 1e-4;

    // [experiments]
    std::uint64_t seed = 12345;
    int n_particles = 10000;
    double particle_dt = 1e-3;
    int dictionary_size = 6;
    int time_grid_size = 4;
    double doubling_eps = 1e-4;
    int residual_probes = 5;

    // [output]
    std::string output_dir = "out";

    static ExperimentConfig load(const std::string& path);
    void validate() const;  // throws std::invalid_argument with a diagnostic
    std::string hash() const;
};

/// Runs one named experiment suite. Returns 0 on success, 3 on numerical
/// failure; config errors throw before any computation.
int run_experiment(const ExperimentConfig& cfg, const std::string& name);

std::vector<std::string> experiment_names();

}  // namespace mfhjb
