#pragma once

#include <array>
#include <functional>
#include <string>

#include "mfhjb/density.hpp"

namespace mfhjb {

/// A real-valued functional of grid functions together with a family tag.
struct Functional {
    std::function<double(const Vec&)> eval;
    std::string tag = "custom";
};

/// The pair (delta S / delta rho, delta S / delta rho') tabulated on the grid.
struct MortensenDerivative {
    Grid grid;
    Vec F;
    Vec G;
};

/// A phi = integral of (F phi + G Dphi), trapezoid quadrature.
inline double pairing(const MortensenDerivative& d, const Vec& phi) {
    require_length(phi, d.grid);
    const Vec dphi = central_diff(phi, d.grid.h);
    return ((d.F * phi + d.G * dphi) * trapezoid_weights(d.grid)).sum();
}

/// S(rho) = integral k rho  ->  (k, 0).
inline MortensenDerivative derivative_linear(const Grid& grid, const Vec& k) {
    require_length(k, grid);
    if (!k.allFinite())
        throw std::invalid_argument("derivative_linear: non-finite kernel");
    return {grid, k, Vec::Zero(grid.n)};
}

/// S(rho) = integral H(rho, rho')  ->  (dH/drho, dH/drho') nodewise.
inline MortensenDerivative derivative_integrand(
    const std::function<double(double, double)>& dH_drho,
    const std::function<double(double, double)>& dH_drhop,
    const GridDensity& rho) {
    const Vec dr = central_diff(rho.values, rho.grid.h);
    Vec F(rho.grid.n), G(rho.grid.n);
    for (int i = 0; i < rho.grid.n; ++i) {
        F[i] = dH_drho(rho.values[i], dr[i]);
        G[i] = dH_drhop(rho.values[i], dr[i]);
    }
    if (!F.allFinite() || !G.allFinite())
        throw std::invalid_argument("derivative_integrand: non-finite partials");
    return {rho.grid, std::move(F), std::move(G)};
}

/// Weighted-energy functional F(v) = integral (v^2 + (Dv)^2) gamma.
inline Functional weighted_energy_functional(const WeightField& w) {
    return {[w](const Vec& v) { return weighted_h12_sq(v, w); }, "weighted-energy"};
}

/// Derivative of F(rho - rho_hat): (2(rho - rho_hat) gamma, 2 D(rho - rho_hat) gamma).
inline MortensenDerivative derivative_weighted_energy(const GridDensity& rho,
                                                      const GridDensity& rho_hat,
                                                      const WeightField& w) {
    require_same_grid(rho.grid, rho_hat.grid);
    require_same_grid(rho.grid, w.grid);
    const Vec diff = rho.values - rho_hat.values;
    return {rho.grid, 2.0 * diff * w.gamma,
            2.0 * central_diff(diff, rho.grid.h) * w.gamma};
}

struct DerivativeReport {
    std::array<double, 3> eps{1e-2, 1e-3, 1e-4};
    std::array<double, 3> r{};
    bool monotone = false;
};

/// Three-decade epsilon sweep of the Frechet remainder
/// r(eps) = |S(rho + eps phi) - S(rho) - eps A phi| / (eps ||phi||_{H12(gamma)}).
DerivativeReport verify_derivative(const Functional& S, const MortensenDerivative& d,
                                   const GridDensity& rho, const std::vector<Vec>& directions,
                                   const WeightField& w);

/// Mass-neutral smooth bump: difference of two Gaussians.
Vec gaussian_difference_bump(const Grid& grid, double c1, double c2, double width);

void save_derivative_csv(const MortensenDerivative& d, const std::string& path);

}  // namespace mfhjb
