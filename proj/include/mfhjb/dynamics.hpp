#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "mfhjb/density.hpp"

namespace mfhjb {

using ControlAtom = Eigen::VectorXd;

inline ControlAtom atom1(double u) {
    ControlAtom a(1);
    a[0] = u;
    return a;
}

/// Problem data: drift b, constant diffusion sigma, running cost f, terminal
/// cost g, control atom set, horizon, and claimed bound constants.
struct ProblemSpec {
    using CoefFn = std::function<double(double t, double x, const GridDensity& rho,
                                        const ControlAtom& u)>;
    CoefFn drift;
    double sigma = 1.0;
    CoefFn running_cost;
    std::function<double(double x, const GridDensity& rho)> terminal_cost;
    std::vector<ControlAtom> atoms;
    double horizon = 1.0;
    double bound_k1 = 0.0;  // Lipschitz constant claim
    double bound_k2 = 0.0;  // |b| bound claim
    double bound_k3 = 0.0;  // |f| + |g| bound claim

    void validate() const {
        if (sigma <= 0.0) throw std::invalid_argument("ProblemSpec: sigma must be positive");
        if (atoms.empty()) throw std::invalid_argument("ProblemSpec: empty atom set");
    }
};

struct BoundCheckReport {
    double max_drift = 0.0;
    double max_cost = 0.0;
    bool drift_ok = false;
    bool cost_ok = false;
};

/// Samples |b| and |f| + |g| over randomized (t, x, rho, u) against the claimed bounds.
BoundCheckReport check_problem_bounds(const ProblemSpec& spec, const Grid& grid,
                                      int samples, std::uint64_t seed);

/// Probability weights over the atom set of a ProblemSpec.
struct RelaxedControl {
    Vec weights;

    RelaxedControl() = default;
    explicit RelaxedControl(Vec w) : weights(std::move(w)) {
        if ((weights < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12)
            throw std::invalid_argument("RelaxedControl: invalid weight vector");
    }
    static RelaxedControl pure(int atom_index, int n_atoms) {
        Vec w = Vec::Zero(n_atoms);
        w[atom_index] = 1.0;
        return RelaxedControl(std::move(w));
    }
};

/// Mixture-averaged coefficient: sum_j weights[j] coef(atoms[j]).
double apply_relaxed(const std::function<double(const ControlAtom&)>& coef,
                     const std::vector<ControlAtom>& atoms, const RelaxedControl& alpha);

/// Piecewise-constant-in-x feedback: one RelaxedControl per grid node.
using FeedbackTable = std::vector<RelaxedControl>;

using SegmentControl = std::variant<RelaxedControl, FeedbackTable>;

/// Piecewise-constant-in-time policy on [breakpoints.front(), breakpoints.back()].
struct PolicySchedule {
    std::vector<double> breakpoints;  // size m + 1, increasing
    std::vector<SegmentControl> segments;

    static PolicySchedule constant(double s, double t_end, RelaxedControl ctrl) {
        PolicySchedule p;
        p.breakpoints = {s, t_end};
        p.segments.emplace_back(std::move(ctrl));
        return p;
    }

    void validate() const;
    const SegmentControl& at(double t) const;
};

/// Nodewise relaxed drift field b(t, x_i, rho, control).
Vec drift_field(double t, const GridDensity& rho, const SegmentControl& control,
                const ProblemSpec& spec);

struct FPStepResult {
    GridDensity density;
    double mass_drift = 0.0;   // pre-renormalization trapezoid mass change
    bool renormalized = false;
};

/// One explicit conservative step of
/// d_t rho = (sigma^2/2) d_xx rho - d_x(b rho), upwind advective flux,
/// zero-flux boundaries.
FPStepResult fokker_planck_step(const GridDensity& rho, double t, double dt,
                                const SegmentControl& control, const ProblemSpec& spec);

struct DensityPath {
    std::vector<double> times;
    std::vector<GridDensity> densities;
    std::vector<double> mass_drifts;
    std::vector<MembershipReport> membership;
};

/// Time integration of the Fokker-Planck equation on [s, t] under the policy.
/// Saved densities are checked for membership; a failure throws
/// "conservativity violation" unless check_membership is false.
DensityPath evolve(const GridDensity& rho0, double s, double t, const PolicySchedule& policy,
                   const ProblemSpec& spec, double dt, int n_saves = 8,
                   bool check_membership = true);

/// Exact zero-drift transition: grid convolution with the Gaussian kernel of
/// variance sigma^2 (t - s).
GridDensity heat_oracle(const GridDensity& rho0, double s, double t, double sigma);

/// Euler-Maruyama simulation of the McKean-Vlasov SDE with KDE mean-field
/// coupling and per-particle relaxed-control sampling. Deterministic in seed.
ParticleEnsemble particle_simulate(const GridDensity& rho0, double s, double t,
                                   const PolicySchedule& policy, const ProblemSpec& spec,
                                   int n_particles, std::uint64_t seed, double dt = 1e-3);

struct GaussianBoundReport {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double max_violation = 0.0;  // relative to envelope value
    bool degenerate = false;
    bool pass = false;
};

/// Fits two-sided Gaussian envelope constants to the particle-estimated
/// transition density from point-like initial bumps. Qualitative check.
GaussianBoundReport gaussian_bound_check(const GridDensity& rho0, const PolicySchedule& policy,
                                         const ProblemSpec& spec, double t,
                                         std::uint64_t seed = 7, int n_particles = 20000);

void save_path_csv(const DensityPath& path, const std::string& file);

}  // namespace mfhjb
