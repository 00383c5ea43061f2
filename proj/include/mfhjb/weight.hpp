#pragma once

#include <cmath>

#include "mfhjb/grid.hpp"

namespace mfhjb {

/// Reference weight gamma with gamma = 1 on |x| <= 1, gamma = e^|x| on |x| > 2,
/// blended on 1 < |x| <= 2 by a C^2 smoothstep of the exponent, together with
/// its first two derivatives and the constants kappa, kappa4.
struct WeightField {
    Grid grid;
    Vec gamma;
    Vec dgamma;
    Vec d2gamma;
    double kappa = 0.0;
    double kappa4 = 0.0;
};

namespace detail {

// gamma(x) = exp(m(|x|)), m(r) = r * S(r - 1) on (1, 2), m = 0 below, m = r above,
// S(u) = 6u^5 - 15u^4 + 10u^3.
inline double weight_exponent(double r) {
    if (r <= 1.0) return 0.0;
    if (r >= 2.0) return r;
    const double u = r - 1.0;
    const double s = ((6.0 * u - 15.0) * u + 10.0) * u * u * u;
    return r * s;
}

inline double weight_exponent_d1(double r) {
    if (r <= 1.0) return 0.0;
    if (r >= 2.0) return 1.0;
    const double u = r - 1.0;
    const double s = ((6.0 * u - 15.0) * u + 10.0) * u * u * u;
    const double sp = ((30.0 * u - 60.0) * u + 30.0) * u * u;
    return s + r * sp;
}

inline double weight_exponent_d2(double r) {
    if (r <= 1.0 || r >= 2.0) return 0.0;
    const double u = r - 1.0;
    const double sp = ((30.0 * u - 60.0) * u + 30.0) * u * u;
    const double spp = ((120.0 * u - 180.0) * u + 60.0) * u;
    return 2.0 * sp + r * spp;
}

inline double gamma_at(double x) {
    return std::exp(weight_exponent(std::abs(x)));
}

}  // namespace detail

inline WeightField build_weight(const Grid& grid) {
    if (grid.lower > -2.5 || grid.upper < 2.5)
        throw std::invalid_argument("build_weight: grid must contain [-2.5, 2.5]");
    WeightField w;
    w.grid = grid;
    w.gamma.resize(grid.n);
    w.dgamma.resize(grid.n);
    w.d2gamma.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double r = std::abs(x);
        const double sgn = (x >= 0.0) ? 1.0 : -1.0;
        const double m1 = detail::weight_exponent_d1(r);
        const double m2 = detail::weight_exponent_d2(r);
        const double g = detail::gamma_at(x);
        w.gamma[i] = g;
        w.dgamma[i] = sgn * m1 * g;
        w.d2gamma[i] = (m2 + m1 * m1) * g;
    }
    w.kappa = std::max((w.dgamma.abs() / w.gamma).maxCoeff(),
                       (w.d2gamma.abs() / w.gamma).maxCoeff());
    w.kappa = std::max(w.kappa, 1.0);
    w.kappa4 = trapezoid(grid.nodes().abs() / w.gamma, grid);
    return w;
}

inline double weighted_l2_norm(const Vec& rho, const WeightField& w) {
    require_length(rho, w.grid);
    return std::sqrt((rho.square() * w.gamma * trapezoid_weights(w.grid)).sum());
}

inline double weighted_h12_norm(const Vec& rho, const WeightField& w) {
    require_length(rho, w.grid);
    const Vec d = central_diff(rho, w.grid.h);
    return std::sqrt(((rho.square() + d.square()) * w.gamma * trapezoid_weights(w.grid)).sum());
}

/// Squared H^1_2(gamma) norm; kept separate so callers avoid sqrt round trips.
inline double weighted_h12_sq(const Vec& rho, const WeightField& w) {
    require_length(rho, w.grid);
    const Vec d = central_diff(rho, w.grid.h);
    return ((rho.square() + d.square()) * w.gamma * trapezoid_weights(w.grid)).sum();
}

}  // namespace mfhjb
