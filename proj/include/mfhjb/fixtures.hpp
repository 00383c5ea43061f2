#pragma once

#include <algorithm>

#include "mfhjb/dynamics.hpp"

namespace mfhjb::fixtures {

/// b = 0, f = 0, g = 0: pure diffusion, matched against the heat oracle.
inline ProblemSpec zero_drift(double sigma = 1.0, double horizon = 1.0) {
    ProblemSpec s;
    s.drift = [](double, double, const GridDensity&, const ControlAtom&) { return 0.0; };
    s.running_cost = [](double, double, const GridDensity&, const ControlAtom&) { return 0.0; };
    s.terminal_cost = [](double, const GridDensity&) { return 0.0; };
    s.atoms = {atom1(0.0)};
    s.sigma = sigma;
    s.horizon = horizon;
    s.bound_k1 = 0.0;
    s.bound_k2 = 0.0;
    s.bound_k3 = 0.0;
    return s;
}

/// b = u on atoms {-1, +1}, f = 0, g(x) = x: the optimal policy is u = -1 and
/// the value is mean(rho0) - (T - s).
inline ProblemSpec pm_drift(double sigma = 1.0, double horizon = 1.0) {
    ProblemSpec s;
    s.drift = [](double, double, const GridDensity&, const ControlAtom& u) { return u[0]; };
    s.running_cost = [](double, double, const GridDensity&, const ControlAtom&) { return 0.0; };
    s.terminal_cost = [](double x, const GridDensity&) { return x; };
    s.atoms = {atom1(-1.0), atom1(1.0)};
    s.sigma = sigma;
    s.horizon = horizon;
    s.bound_k1 = 0.0;
    s.bound_k2 = 1.0;
    s.bound_k3 = 8.0;  // |g| = |x| on the truncated domain
    return s;
}

/// f = c, everything else control-independent: V(t, rho) = c (T - t).
inline ProblemSpec control_irrelevant(double c = 0.5, double sigma = 1.0,
                                      double horizon = 1.0) {
    ProblemSpec s;
    s.drift = [](double, double, const GridDensity&, const ControlAtom&) { return 0.0; };
    s.running_cost = [c](double, double, const GridDensity&, const ControlAtom&) { return c; };
    s.terminal_cost = [](double, const GridDensity&) { return 0.0; };
    s.atoms = {atom1(-1.0), atom1(1.0)};
    s.sigma = sigma;
    s.horizon = horizon;
    s.bound_k2 = 0.0;
    s.bound_k3 = c;
    return s;
}

/// Ornstein-Uhlenbeck drift b = -x (control-free); stationary at N(0, sigma^2/2).
inline ProblemSpec ornstein_uhlenbeck(double sigma = 1.0, double horizon = 1.0) {
    ProblemSpec s;
    s.drift = [](double, double x, const GridDensity&, const ControlAtom&) { return -x; };
    s.running_cost = [](double, double, const GridDensity&, const ControlAtom&) { return 0.0; };
    s.terminal_cost = [](double, const GridDensity&) { return 0.0; };
    s.atoms = {atom1(0.0)};
    s.sigma = sigma;
    s.horizon = horizon;
    s.bound_k1 = 1.0;
    s.bound_k2 = 8.0;
    s.bound_k3 = 0.0;
    return s;
}

/// Bounded mean-reverting drift b = -k clip(x, [-1, 1]): satisfies the
/// boundedness assumption used by the Gaussian-envelope check.
inline ProblemSpec clipped_ou(double k = 0.3, double sigma = 1.0, double horizon = 1.0) {
    ProblemSpec s;
    s.drift = [k](double, double x, const GridDensity&, const ControlAtom&) {
        return -k * std::clamp(x, -1.0, 1.0);
    };
    s.running_cost = [](double, double, const GridDensity&, const ControlAtom&) { return 0.0; };
    s.terminal_cost = [](double, const GridDensity&) { return 0.0; };
    s.atoms = {atom1(0.0)};
    s.sigma = sigma;
    s.horizon = horizon;
    s.bound_k1 = k;
    s.bound_k2 = k;
    s.bound_k3 = 0.0;
    return s;
}

inline ProblemSpec by_name(const std::string& name, double sigma, double horizon,
                           double cost_constant) {
    if (name == "zero-drift") return zero_drift(sigma, horizon);
    if (name == "pm-drift") return pm_drift(sigma, horizon);
    if (name == "control-irrelevant") return control_irrelevant(cost_constant, sigma, horizon);
    if (name == "ou") return ornstein_uhlenbeck(sigma, horizon);
    throw std::invalid_argument("unknown fixture: " + name);
}

}  // namespace mfhjb::fixtures
