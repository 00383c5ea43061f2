#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "mfhjb/density.hpp"
#include "mfhjb/rng.hpp"

using namespace mfhjb;

namespace {

GridDensity random_gaussian(const Grid& g, RngStream& rng) {
    return gaussian_density(-1.5 + 3.0 * rng.uniform(), 0.1 + 0.5 * rng.uniform(), g);
}

}  // namespace

TEST_CASE("GridDensity validation") {
    const Grid g = Grid::make(-8.0, 8.0, 129);
    const GridDensity ok = gaussian_density(0.0, 0.25, g);
    CHECK(ok.mass() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ok.weighted_energy > 0.0);

    Vec neg = ok.values;
    neg[g.n / 2] = -1e-3;
    CHECK_THROWS_AS(GridDensity(g, neg), std::invalid_argument);

    CHECK_THROWS_AS(GridDensity(g, Vec(0.5 * ok.values)), std::invalid_argument);

    Vec boundary = ok.values;
    boundary[0] = 1e-3;
    CHECK_THROWS_AS(GridDensity(g, boundary), std::invalid_argument);

    // validate=false admits signed perturbations (used for probing only)
    CHECK_NOTHROW(GridDensity(g, neg, false));
}

TEST_CASE("gaussian_density requires comfortable support") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    CHECK_THROWS_AS(gaussian_density(7.0, 0.25, g), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_density(0.0, 9.0, g), std::invalid_argument);
}

TEST_CASE("D1r membership report") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const WeightField w = build_weight(g);
    const GridDensity rho = gaussian_density(0.3, 0.2, g);
    const MembershipReport rep = check_d1r_membership(rho, w);
    CHECK(rep.pass);
    CHECK(rep.weighted_energy == doctest::Approx(rho.weighted_energy).epsilon(1e-12));

    Vec bad = rho.values;
    bad[10] = -1e-4;
    const MembershipReport rep2 = check_d1r_membership(g, bad, w);
    CHECK(rep2.negativity);
    CHECK_FALSE(rep2.pass);
}

TEST_CASE("wasserstein1: translation oracle, symmetry, identity") {
    const Grid g = Grid::make(-10.0, 10.0, 2049);
    RngStream rng(3);
    for (int k = 0; k < 10; ++k) {
        const double a = -1.0 + 2.0 * rng.uniform();
        const double b = -1.0 + 2.0 * rng.uniform();
        const double v = 0.15 + 0.3 * rng.uniform();
        const GridDensity ra = gaussian_density(a, v, g);
        const GridDensity rb = gaussian_density(b, v, g);
        // translating a density moves it by exactly the shift in W1
        CHECK(wasserstein1(ra, rb) == doctest::Approx(std::abs(a - b)).epsilon(5e-3));
        CHECK(wasserstein1(ra, rb) == doctest::Approx(wasserstein1(rb, ra)).epsilon(1e-12));
    }
    const GridDensity r = gaussian_density(0.0, 0.25, g);
    CHECK(wasserstein1(r, r) == 0.0);
}

TEST_CASE("wasserstein1 triangle inequality on random triples") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    RngStream rng(17);
    for (int k = 0; k < 30; ++k) {
        const GridDensity a = random_gaussian(g, rng);
        const GridDensity b = random_gaussian(g, rng);
        const GridDensity c = random_gaussian(g, rng);
        CHECK(wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 4.0 * g.h);
    }
}

TEST_CASE("total variation: identity and disjoint bumps") {
    const Grid g = Grid::make(-8.0, 8.0, 1025);
    const GridDensity a = gaussian_density(-2.0, 0.05, g);
    const GridDensity b = gaussian_density(2.0, 0.05, g);
    CHECK(total_variation(a, a) == 0.0);
    CHECK(total_variation(a, b) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("weighted W1 bound on 100 random pairs") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const WeightField w = build_weight(g);
    RngStream rng(29);
    for (int k = 0; k < 100; ++k) {
        const GridDensity a = random_gaussian(g, rng);
        const GridDensity b = random_gaussian(g, rng);
        const W1BoundReport rep = check_w1_weighted_bound(a, b, w);
        CHECK(rep.holds);
        CHECK(rep.w1 <= rep.rhs + 4.0 * g.h);
    }
}

TEST_CASE("silverman bandwidth and kde consistency") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const GridDensity target = gaussian_density(0.0, 0.25, g);

    // inverse-CDF sampling of the target at increasing N
    const Vec cdf = cumulative_trapezoid(target.values, g);
    double prev_err = 1e9;
    for (int N : {500, 5000, 50000}) {
        Eigen::VectorXd pos(N);
        RngStream rng(101);
        for (int p = 0; p < N; ++p) {
            const double u = rng.uniform() * cdf[g.n - 1];
            int i = 1;
            while (i < g.n - 1 && cdf[i] < u) ++i;
            const double t = (u - cdf[i - 1]) / std::max(cdf[i] - cdf[i - 1], 1e-300);
            pos[p] = g.x(i - 1) + t * g.h;
        }
        const ParticleEnsemble e(pos, 101);
        const double bw = silverman_bandwidth(e);
        CHECK(bw > 0.0);
        const GridDensity est = kde(e, bw, g);
        CHECK(est.mass() == doctest::Approx(1.0).epsilon(1e-9));
        const double err = wasserstein1(est, target);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 0.02);
}

TEST_CASE("particle ensemble validation") {
    CHECK_THROWS_AS(ParticleEnsemble(Eigen::VectorXd::Zero(50), 1), std::invalid_argument);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(200);
    bad[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ParticleEnsemble(bad, 1), std::invalid_argument);
}

TEST_CASE("density CSV round trip") {
    const Grid g = Grid::make(-8.0, 8.0, 129);
    const GridDensity rho = gaussian_density(0.4, 0.3, g);
    const std::string path = "test_density_roundtrip.csv";
    save_density_csv(rho, path);
    const GridDensity back = load_density_csv(path);
    REQUIRE(back.grid.n == g.n);
    for (int i = 0; i < g.n; ++i)
        CHECK(back.values[i] == doctest::Approx(rho.values[i]).epsilon(1e-12));
    std::remove(path.c_str());
}
