#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfhjb/fixtures.hpp"
#include "mfhjb/rng.hpp"

using namespace mfhjb;

namespace {

PolicySchedule random_policy(const ProblemSpec& spec, double s, double t, RngStream& rng) {
    const int n_atoms = static_cast<int>(spec.atoms.size());
    PolicySchedule p;
    const int segs = 1 + static_cast<int>(3.0 * rng.uniform());
    p.breakpoints.push_back(s);
    for (int j = 1; j < segs; ++j) p.breakpoints.push_back(s + (t - s) * j / segs);
    p.breakpoints.push_back(t);
    for (int j = 0; j < segs; ++j) {
        Vec wgt(n_atoms);
        for (int a = 0; a < n_atoms; ++a) wgt[a] = 0.05 + rng.uniform();
        wgt /= wgt.sum();
        p.segments.emplace_back(RelaxedControl(std::move(wgt)));
    }
    return p;
}

}  // namespace

TEST_CASE("fokker_planck_step: mass conservation, positivity, stability guard") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const ProblemSpec spec = fixtures::pm_drift();
    const SegmentControl ctrl = RelaxedControl::pure(0, 2);
    GridDensity rho = gaussian_density(0.0, 0.25, g);

    const double dt_ok = 0.4 * g.h * g.h / (2.0 * spec.sigma * spec.sigma);
    for (int k = 0; k < 200; ++k) {
        const FPStepResult res = fokker_planck_step(rho, k * dt_ok, dt_ok, ctrl, spec);
        CHECK(std::abs(res.mass_drift) <= 1e-12);
        CHECK((res.density.values >= 0.0).all());
        rho = res.density;
    }
    CHECK(rho.mass() == doctest::Approx(1.0).epsilon(1e-10));

    const double dt_bad = 4.0 * g.h * g.h / (2.0 * spec.sigma * spec.sigma);
    CHECK_THROWS_WITH_AS(fokker_planck_step(rho, 0.0, dt_bad, ctrl, spec),
                         doctest::Contains("stability"), std::invalid_argument);
}

TEST_CASE("zero drift matches the heat oracle and refines >= 3x") {
    double errs[2] = {0.0, 0.0};
    const int ns[2] = {257, 513};
    const double dts[2] = {4e-4, 1e-4};
    for (int lvl = 0; lvl < 2; ++lvl) {
        const Grid g = Grid::make(-8.0, 8.0, ns[lvl]);
        const ProblemSpec spec = fixtures::zero_drift();
        const GridDensity rho0 = gaussian_density(0.0, 0.25, g);
        const PolicySchedule pol = PolicySchedule::constant(0.0, 0.5, RelaxedControl::pure(0, 1));
        const DensityPath path = evolve(rho0, 0.0, 0.5, pol, spec, dts[lvl], 2);
        errs[lvl] = wasserstein1(path.densities.back(), heat_oracle(rho0, 0.0, 0.5, 1.0));
    }
    CHECK(errs[1] <= 1e-3);
    CHECK(errs[1] < errs[0] / 3.0);
}

TEST_CASE("constant drift moves the mean at the drift rate") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const ProblemSpec spec = fixtures::pm_drift();
    const GridDensity rho0 = gaussian_density(0.5, 0.2, g);
    const PolicySchedule pol = PolicySchedule::constant(0.0, 0.8, RelaxedControl::pure(0, 2));
    const DensityPath path = evolve(rho0, 0.0, 0.8, pol, spec, 1e-4, 2);
    const Vec wq = trapezoid_weights(g);
    const double mean_end = (g.nodes() * path.densities.back().values * wq).sum();
    CHECK(mean_end == doctest::Approx(0.5 - 0.8).epsilon(1e-6));
}

TEST_CASE("OU stationary density is preserved up to scheme error") {
    // upwind advection adds O(h) numerical diffusion, so the drift away from
    // the stationary profile must be small and shrink under grid refinement
    double errs[2] = {0.0, 0.0};
    const int ns[2] = {257, 513};
    const double dts[2] = {2e-4, 5e-5};
    for (int lvl = 0; lvl < 2; ++lvl) {
        const Grid g = Grid::make(-8.0, 8.0, ns[lvl]);
        const ProblemSpec spec = fixtures::ornstein_uhlenbeck();
        const GridDensity stat = gaussian_density(0.0, 0.5, g);  // N(0, sigma^2/2)
        const PolicySchedule pol =
            PolicySchedule::constant(0.0, 0.5, RelaxedControl::pure(0, 1));
        const DensityPath path = evolve(stat, 0.0, 0.5, pol, spec, dts[lvl], 2);
        errs[lvl] = wasserstein1(path.densities.back(), stat);
    }
    CHECK(errs[1] <= 0.01);
    CHECK(errs[1] < errs[0]);
}

TEST_CASE("membership holds along 10 random policy rollouts") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const ProblemSpec spec = fixtures::pm_drift();
    RngStream rng(71);
    for (int k = 0; k < 10; ++k) {
        const GridDensity rho0 =
            gaussian_density(-0.8 + 1.6 * rng.uniform(), 0.15 + 0.3 * rng.uniform(), g);
        const PolicySchedule pol = random_policy(spec, 0.0, 1.0, rng);
        const DensityPath path = evolve(rho0, 0.0, 1.0, pol, spec, 5e-4, 8);
        for (const MembershipReport& m : path.membership) CHECK(m.pass);
    }
}

TEST_CASE("time continuity quantity decays over a delta sweep") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const WeightField w = build_weight(g);
    const ProblemSpec spec = fixtures::ornstein_uhlenbeck();
    const GridDensity rho0 = gaussian_density(0.6, 0.2, g);
    const PolicySchedule pol = PolicySchedule::constant(0.0, 0.4, RelaxedControl::pure(0, 1));
    // max consecutive-save L2(gamma) gap of rho and Drho at three save spacings
    double prev = 1e300;
    for (int saves : {3, 5, 9}) {
        const DensityPath path = evolve(rho0, 0.0, 0.4, pol, spec, 2e-4, saves);
        double worst = 0.0;
        for (std::size_t k = 1; k < path.densities.size(); ++k) {
            const Vec diff = path.densities[k].values - path.densities[k - 1].values;
            const double q = weighted_l2_norm(diff, w) +
                             weighted_l2_norm(central_diff(diff, g.h), w);
            worst = std::max(worst, q);
        }
        CHECK(worst < prev);
        prev = worst;
    }
}

TEST_CASE("particle simulation is deterministic in the seed") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const ProblemSpec spec = fixtures::pm_drift();
    const GridDensity rho0 = gaussian_density(0.0, 0.25, g);
    const PolicySchedule pol = PolicySchedule::constant(0.0, 0.3, RelaxedControl::pure(1, 2));
    const ParticleEnsemble a = particle_simulate(rho0, 0.0, 0.3, pol, spec, 500, 99, 1e-3);
    const ParticleEnsemble b = particle_simulate(rho0, 0.0, 0.3, pol, spec, 500, 99, 1e-3);
    CHECK((a.positions - b.positions).cwiseAbs().maxCoeff() == 0.0);
    const ParticleEnsemble c = particle_simulate(rho0, 0.0, 0.3, pol, spec, 500, 100, 1e-3);
    CHECK((a.positions - c.positions).cwiseAbs().maxCoeff() > 0.0);

    // the first particles' streams are unchanged when the ensemble grows
    const ParticleEnsemble d = particle_simulate(rho0, 0.0, 0.3, pol, spec, 600, 99, 1e-3);
    CHECK((a.positions - d.positions.head(500)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("particle KDE approaches the PDE solution") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const ProblemSpec spec = fixtures::zero_drift();
    const GridDensity rho0 = gaussian_density(0.0, 0.25, g);
    const PolicySchedule pol = PolicySchedule::constant(0.0, 0.5, RelaxedControl::pure(0, 1));
    const DensityPath path = evolve(rho0, 0.0, 0.5, pol, spec, 1e-4, 2);
    const ParticleEnsemble e = particle_simulate(rho0, 0.0, 0.5, pol, spec, 4000, 12345, 1e-3);
    const GridDensity est = kde(e, silverman_bandwidth(e), g);
    CHECK(wasserstein1(est, path.densities.back()) <= 0.08);
}

TEST_CASE("gaussian envelope check on bounded-drift dynamics") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const ProblemSpec spec = fixtures::clipped_ou(0.3);
    const GridDensity rho0 = gaussian_density(0.0, 0.25, g);
    const PolicySchedule pol = PolicySchedule::constant(0.0, 0.3, RelaxedControl::pure(0, 1));
    const GaussianBoundReport rep = gaussian_bound_check(rho0, pol, spec, 0.3, 7, 20000);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.kappa1 > 0.0);
    CHECK(rep.kappa2 > 0.0);
    CHECK(rep.pass);
}

TEST_CASE("problem bound claims are sampled") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const BoundCheckReport rep = check_problem_bounds(fixtures::pm_drift(), g, 200, 5);
    CHECK(rep.drift_ok);
    CHECK(rep.cost_ok);

    ProblemSpec lying = fixtures::pm_drift();
    lying.bound_k2 = 0.5;  // claims |b| <= 0.5 but |u| = 1
    const BoundCheckReport rep2 = check_problem_bounds(lying, g, 200, 5);
    CHECK_FALSE(rep2.drift_ok);
}

TEST_CASE("evolve argument validation") {
    const Grid g = Grid::make(-8.0, 8.0, 129);
    const ProblemSpec spec = fixtures::zero_drift();
    const GridDensity rho0 = gaussian_density(0.0, 0.25, g);
    const PolicySchedule pol = PolicySchedule::constant(0.0, 0.5, RelaxedControl::pure(0, 1));
    CHECK_THROWS_AS(evolve(rho0, 0.5, 0.5, pol, spec, 1e-4), std::invalid_argument);
    CHECK_THROWS_AS(evolve(rho0, 0.0, 0.9, pol, spec, 1e-4), std::invalid_argument);
}
