#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfhjb/mortensen.hpp"
#include "mfhjb/rng.hpp"

using namespace mfhjb;

namespace {

Vec random_bump(const Grid& g, RngStream& rng) {
    const double c1 = -1.5 + 3.0 * rng.uniform();
    const double c2 = -1.5 + 3.0 * rng.uniform();
    return gaussian_difference_bump(g, c1, c2 + 0.1, 0.2 + 0.4 * rng.uniform());
}

}  // namespace

TEST_CASE("linear functionals have exact derivatives") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const WeightField w = build_weight(g);
    const GridDensity rho = gaussian_density(0.0, 0.3, g);
    const Vec wq = trapezoid_weights(g);

    for (int which = 0; which < 2; ++which) {
        const Vec k = which == 0 ? Vec(Vec::Ones(g.n)) : Vec(g.nodes());
        const Functional S{[k, wq](const Vec& v) { return (k * v * wq).sum(); }, "linear"};
        const MortensenDerivative d = derivative_linear(g, k);
        CHECK(d.G.abs().maxCoeff() == 0.0);
        RngStream rng(41);
        std::vector<Vec> dirs;
        for (int i = 0; i < 5; ++i) dirs.push_back(random_bump(g, rng));
        const DerivativeReport rep = verify_derivative(S, d, rho, dirs, w);
        CHECK(rep.r[2] <= 1e-10);
        CHECK(rep.monotone);
    }
}

TEST_CASE("integrand functionals: rho^2 and (Drho)^2 on 20 random pairs") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const WeightField w = build_weight(g);
    const Vec wq = trapezoid_weights(g);
    RngStream rng(43);
    for (int k = 0; k < 20; ++k) {
        const GridDensity rho =
            gaussian_density(-1.0 + 2.0 * rng.uniform(), 0.15 + 0.3 * rng.uniform(), g);
        const std::vector<Vec> dirs{random_bump(g, rng)};

        const Functional s2{[wq](const Vec& v) { return (v * v * wq).sum(); }, "rho2"};
        const MortensenDerivative d2 = derivative_integrand(
            [](double r, double) { return 2.0 * r; }, [](double, double) { return 0.0; },
            rho);
        const DerivativeReport r2 = verify_derivative(s2, d2, rho, dirs, w);
        CHECK(r2.r[2] <= 1e-3);
        CHECK(r2.monotone);

        const Functional sg{[wq, &g](const Vec& v) {
                                const Vec dv = central_diff(v, g.h);
                                return (dv * dv * wq).sum();
                            },
                            "drho2"};
        const MortensenDerivative dg = derivative_integrand(
            [](double, double) { return 0.0; }, [](double, double rp) { return 2.0 * rp; },
            rho);
        const DerivativeReport rg = verify_derivative(sg, dg, rho, dirs, w);
        CHECK(rg.r[2] <= 1e-3);
        CHECK(rg.monotone);
    }
}

TEST_CASE("pairing is bilinear") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    RngStream rng(47);
    const Vec F = random_bump(g, rng);
    const Vec G = random_bump(g, rng);
    const MortensenDerivative d{g, F, G};
    const Vec phi = random_bump(g, rng);
    const Vec psi = random_bump(g, rng);
    const double a = -0.7, b = 2.3;
    CHECK(pairing(d, Vec(a * phi + b * psi)) ==
          doctest::Approx(a * pairing(d, phi) + b * pairing(d, psi)).epsilon(1e-12));
}

TEST_CASE("quadratic remainder identity for the weighted-energy functional") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const WeightField w = build_weight(g);
    const Functional en = weighted_energy_functional(w);
    RngStream rng(53);
    for (int k = 0; k < 10; ++k) {
        const GridDensity rho =
            gaussian_density(-1.0 + 2.0 * rng.uniform(), 0.15 + 0.3 * rng.uniform(), g);
        const GridDensity rho_hat =
            gaussian_density(-1.0 + 2.0 * rng.uniform(), 0.15 + 0.3 * rng.uniform(), g);
        const Vec phi = random_bump(g, rng);
        const MortensenDerivative d = derivative_weighted_energy(rho, rho_hat, w);
        const Vec diff = rho.values - rho_hat.values;
        const double remainder = en.eval(diff + phi) - en.eval(diff) - pairing(d, phi);
        const double expected = weighted_h12_sq(phi, w);
        CHECK(std::abs(remainder - expected) <= 1e-10 * std::max(1.0, expected));
    }
}

TEST_CASE("difference bumps are mass-neutral") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    RngStream rng(59);
    for (int k = 0; k < 20; ++k) {
        const Vec phi = random_bump(g, rng);
        CHECK(std::abs(trapezoid(phi, g)) <= 1e-8);
    }
}

TEST_CASE("verify_derivative rejects bad input") {
    const Grid g = Grid::make(-8.0, 8.0, 129);
    const WeightField w = build_weight(g);
    const GridDensity rho = gaussian_density(0.0, 0.3, g);
    const Functional blows{[](const Vec&) { return std::numeric_limits<double>::infinity(); },
                           "bad"};
    const MortensenDerivative d{g, Vec::Zero(g.n), Vec::Zero(g.n)};
    CHECK_THROWS_AS(verify_derivative(blows, d, rho, {Vec(Vec::Ones(g.n))}, w),
                    std::invalid_argument);
}
