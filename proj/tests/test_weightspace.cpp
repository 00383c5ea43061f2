#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mfhjb/rng.hpp"
#include "mfhjb/weight.hpp"

using namespace mfhjb;

TEST_CASE("grid construction and quadrature") {
    CHECK_THROWS_AS(Grid::make(-8.0, 8.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make(-1.0, 8.0, 65), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make(-8.0, 1.5, 65), std::invalid_argument);

    const Grid g = Grid::make(-8.0, 8.0, 129);
    CHECK(g.h == doctest::Approx(16.0 / 128).epsilon(1e-14));
    CHECK(g.x(0) == -8.0);
    CHECK(g.x(g.n - 1) == doctest::Approx(8.0).epsilon(1e-14));

    // trapezoid integrates affine functions exactly
    const Vec f = 2.0 * g.nodes() + 3.0;
    CHECK(trapezoid(f, g) == doctest::Approx(3.0 * 16.0).epsilon(1e-12));

    // cumulative trapezoid ends at the full integral
    const Vec c = cumulative_trapezoid(f, g);
    CHECK(c[0] == 0.0);
    CHECK(c[g.n - 1] == doctest::Approx(trapezoid(f, g)).epsilon(1e-12));
}

TEST_CASE("central differences are second order in the interior") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const Vec x = g.nodes();
    const Vec v = x * x;  // derivative exactly 2x under central differences
    const Vec d = central_diff(v, g.h);
    for (int i = 1; i + 1 < g.n; ++i)
        CHECK(d[i] == doctest::Approx(2.0 * g.x(i)).epsilon(1e-10));

    // O(h^2) convergence on a smooth non-polynomial
    double err_coarse = 0.0, err_fine = 0.0;
    for (int lvl = 0; lvl < 2; ++lvl) {
        const Grid gl = Grid::make(-8.0, 8.0, lvl == 0 ? 129 : 257);
        const Vec xl = gl.nodes();
        const Vec dl = central_diff(Vec(xl.sin()), gl.h);
        double e = 0.0;
        for (int i = 1; i + 1 < gl.n; ++i)
            e = std::max(e, std::abs(dl[i] - std::cos(gl.x(i))));
        (lvl == 0 ? err_coarse : err_fine) = e;
    }
    CHECK(err_fine < err_coarse / 3.5);
}

TEST_CASE("weight field values and smoothness") {
    const Grid g = Grid::make(-8.0, 8.0, 1025);
    const WeightField w = build_weight(g);

    CHECK_THROWS_AS(build_weight(Grid::make(-2.2, 8.0, 129)), std::invalid_argument);

    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        CHECK(w.gamma[i] >= 1.0);
        if (std::abs(x) <= 1.0) CHECK(w.gamma[i] == 1.0);
        if (std::abs(x) >= 2.0)
            CHECK(w.gamma[i] == doctest::Approx(std::exp(std::abs(x))).epsilon(1e-13));
    }

    // analytic derivatives agree with high-resolution finite differences
    const double fd_h = 1e-5;
    RngStream rng(11);
    for (int k = 0; k < 200; ++k) {
        const double x = -4.0 + 8.0 * rng.uniform();
        const double gp = (detail::gamma_at(x + fd_h) - detail::gamma_at(x - fd_h)) / (2 * fd_h);
        const double gpp = (detail::gamma_at(x + fd_h) - 2 * detail::gamma_at(x) +
                            detail::gamma_at(x - fd_h)) /
                           (fd_h * fd_h);
        const double m1 = detail::weight_exponent_d1(std::abs(x));
        const double m2 = detail::weight_exponent_d2(std::abs(x));
        const double sgn = x >= 0 ? 1.0 : -1.0;
        CHECK(sgn * m1 * detail::gamma_at(x) == doctest::Approx(gp).epsilon(1e-6));
        CHECK((m2 + m1 * m1) * detail::gamma_at(x) ==
              doctest::Approx(gpp).epsilon(1e-4).scale(1.0));
    }
}

TEST_CASE("kappa dominates the relative derivatives of gamma") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const WeightField w = build_weight(g);
    CHECK(w.kappa >= 1.0);
    for (int i = 0; i < g.n; ++i) {
        CHECK(std::abs(w.dgamma[i]) <= w.kappa * w.gamma[i] + 1e-14);
        CHECK(std::abs(w.d2gamma[i]) <= w.kappa * w.gamma[i] + 1e-14);
    }
}

TEST_CASE("kappa4 is stable under quadrature refinement") {
    const double k_coarse = build_weight(Grid::make(-8.0, 8.0, 513)).kappa4;
    const double k_fine = build_weight(Grid::make(-8.0, 8.0, 4097)).kappa4;
    CHECK(k_coarse == doctest::Approx(k_fine).epsilon(1e-4));
    CHECK(k_fine > 0.0);
}

TEST_CASE("weighted norms: ordering, scaling, refinement") {
    const Grid g = Grid::make(-8.0, 8.0, 257);
    const WeightField w = build_weight(g);
    const Vec x = g.nodes();
    const Vec v = (-x * x / 0.5).exp();

    const double l2 = weighted_l2_norm(v, w);
    const double h12 = weighted_h12_norm(v, w);
    CHECK(h12 >= l2);
    CHECK(weighted_l2_norm(Vec(2.0 * v), w) == doctest::Approx(2.0 * l2).epsilon(1e-12));
    CHECK(weighted_h12_sq(v, w) == doctest::Approx(h12 * h12).epsilon(1e-12));

    // refinement toward a reference value computed at very high resolution
    const Grid gr = Grid::make(-8.0, 8.0, 8193);
    const WeightField wr = build_weight(gr);
    const Vec vr = (-gr.nodes() * gr.nodes() / 0.5).exp();
    const double ref = weighted_h12_norm(vr, wr);
    const Grid gf = Grid::make(-8.0, 8.0, 513);
    const WeightField wf = build_weight(gf);
    const Vec vf = (-gf.nodes() * gf.nodes() / 0.5).exp();
    const double err_c = std::abs(weighted_h12_norm(v, w) - ref);
    const double err_f = std::abs(weighted_h12_norm(vf, wf) - ref);
    CHECK(err_f < err_c / 3.0);
}

TEST_CASE("integration-by-parts bound with kappa on random smooth functions") {
    const Grid g = Grid::make(-8.0, 8.0, 513);
    const WeightField w = build_weight(g);
    const Vec wq = trapezoid_weights(g);
    RngStream rng(5);
    for (int k = 0; k < 50; ++k) {
        const double c = -2.0 + 4.0 * rng.uniform();
        const double s2 = 0.1 + 0.5 * rng.uniform();
        const Vec v = ((g.nodes() - c).square() / (-2.0 * s2)).exp();
        const double lhs = std::abs((v * w.dgamma * wq).sum());
        const double rhs = w.kappa * (v.abs() * w.gamma * wq).sum();
        CHECK(lhs <= rhs + 1e-12);
    }
}
