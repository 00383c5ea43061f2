#include "mfhjb/control.hpp"

#include <cmath>

namespace mfhjb {

namespace {

/// Relaxed running-cost integrand summed over the grid.
double running_cost_rate(double t, const GridDensity& rho, const SegmentControl& control,
                         const ProblemSpec& spec) {
    const Vec wq = trapezoid_weights(rho.grid);
    double out = 0.0;
    const auto* rc = std::get_if<RelaxedControl>(&control);
    const auto* table = rc ? nullptr : &std::get<FeedbackTable>(control);
    for (int i = 0; i < rho.grid.n; ++i) {
        if (rho.values[i] == 0.0) continue;
        const double x = rho.grid.x(i);
        const RelaxedControl& ctrl = rc ? *rc : (*table)[i];
        const double f = apply_relaxed(
            [&](const ControlAtom& u) { return spec.running_cost(t, x, rho, u); },
            spec.atoms, ctrl);
        out += f * rho.values[i] * wq[i];
    }
    return out;
}

double terminal_cost(const GridDensity& rho, const ProblemSpec& spec) {
    const Vec wq = trapezoid_weights(rho.grid);
    double out = 0.0;
    for (int i = 0; i < rho.grid.n; ++i)
        out += spec.terminal_cost(rho.grid.x(i), rho) * rho.values[i] * wq[i];
    return out;
}

/// Advance rho from t0 to t1 under one control, accumulating the running cost
/// by the left-endpoint rule matching the explicit time stepper.
std::pair<double, GridDensity> segment_rollout(const GridDensity& rho_in, double t0, double t1,
                                               const SegmentControl& control,
                                               const ProblemSpec& spec, double dt) {
    const int nsteps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt - 1e-12)));
    const double step = (t1 - t0) / nsteps;
    GridDensity rho = rho_in;
    double j = 0.0;
    for (int k = 0; k < nsteps; ++k) {
        const double r = t0 + k * step;
        j += step * running_cost_rate(r, rho, control, spec);
        rho = fokker_planck_step(rho, r, step, control, spec).density;
    }
    return {j, std::move(rho)};
}

}  // namespace

double cost(const GridDensity& rho0, double s, const PolicySchedule& policy,
            const ProblemSpec& spec, double dt) {
    spec.validate();
    policy.validate();
    const double T = spec.horizon;
    if (policy.breakpoints.front() > s + 1e-12 || policy.breakpoints.back() < T - 1e-12)
        throw std::invalid_argument("cost: policy does not cover [s, T]");
    GridDensity rho = rho0;
    double j = 0.0;
    for (std::size_t seg = 0; seg < policy.segments.size(); ++seg) {
        const double t0 = std::max(s, policy.breakpoints[seg]);
        const double t1 = policy.breakpoints[seg + 1];
        if (t1 <= s + 1e-15) continue;
        auto [js, rho_out] = segment_rollout(rho, t0, t1, policy.segments[seg], spec, dt);
        j += js;
        rho = std::move(rho_out);
    }
    return j + terminal_cost(rho, spec);
}

ValueEstimate value(const GridDensity& rho0, double s, const ProblemSpec& spec,
                    const SearchConfig& search) {
    spec.validate();
    if (search.candidates.empty())
        throw std::invalid_argument("value: empty candidate set");
    if (s > spec.horizon)
        throw std::invalid_argument("value: need s <= horizon");
    if (s >= spec.horizon - 1e-15) {
        ValueEstimate est;
        est.value = terminal_cost(rho0, spec);
        est.argmin_policy = PolicySchedule::constant(s, spec.horizon + 1.0, search.candidates[0]);
        est.candidates_evaluated = 1;
        return est;
    }
    const int K = std::max(1, search.pieces);
    const double T = spec.horizon;
    std::vector<double> breaks(K + 1);
    for (int j = 0; j <= K; ++j) breaks[j] = s + (T - s) * j / K;

    ValueEstimate best;
    best.value = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    std::vector<int> choice(K, 0);

    // depth-first over candidate sequences, reusing segment prefixes
    std::function<void(int, const GridDensity&, double)> dfs =
        [&](int depth, const GridDensity& rho, double j_acc) {
            if (depth == K) {
                const double total = j_acc + terminal_cost(rho, spec);
                ++best.candidates_evaluated;
                if (total < best.value) {
                    second = best.value;
                    best.value = total;
                    PolicySchedule p;
                    p.breakpoints = breaks;
                    for (int d = 0; d < K; ++d)
                        p.segments.emplace_back(search.candidates[choice[d]]);
                    best.argmin_policy = std::move(p);
                } else if (total < second) {
                    second = total;
                }
                return;
            }
            for (std::size_t c = 0; c < search.candidates.size(); ++c) {
                choice[depth] = static_cast<int>(c);
                auto [js, rho_out] =
                    segment_rollout(rho, breaks[depth], breaks[depth + 1],
                                    SegmentControl(search.candidates[c]), spec, search.dt);
                dfs(depth + 1, rho_out, j_acc + js);
            }
        };
    dfs(0, rho0, 0.0);
    best.best_second_gap = std::isfinite(second) ? second - best.value : 0.0;
    return best;
}

DppReport check_dpp(const GridDensity& rho0, double s, double t, const ProblemSpec& spec,
                    const SearchConfig& search) {
    if (!(s < t && t < spec.horizon))
        throw std::invalid_argument("check_dpp: need s < t < horizon");
    DppReport rep;

    // LHS: the full-horizon value with uniform segments on [s, T]
    rep.lhs = value(rho0, s, spec, search).value;

    // RHS: best first-segment rollout to t plus the value restarted at t,
    // brute-forced over the same candidate set
    rep.rhs = std::numeric_limits<double>::infinity();
    for (std::size_t c0 = 0; c0 < search.candidates.size(); ++c0) {
        auto [j0, rho_t] = segment_rollout(rho0, s, t, SegmentControl(search.candidates[c0]),
                                           spec, search.dt);
        rep.rhs = std::min(rep.rhs, j0 + value(rho_t, t, spec, search).value);
    }
    rep.gap = std::abs(rep.lhs - rep.rhs);
    rep.tol = 5.0 * search.dt + 10.0 * rho0.grid.h * rho0.grid.h;
    rep.pass = rep.gap <= rep.tol;
    return rep;
}

ContinuityReport check_value_continuity(const ProblemSpec& spec,
                                        const std::vector<ContinuityPair>& pairs,
                                        const SearchConfig& search) {
    ContinuityReport rep;
    for (const auto& p : pairs) {
        const double denom = std::sqrt(std::abs(p.s - p.s_prime)) +
                             wasserstein1(p.rho, p.rho_prime);
        if (denom < 1e-12) {
            ++rep.skipped;
            continue;
        }
        const double v1 = value(p.rho, p.s, spec, search).value;
        const double v2 = value(p.rho_prime, p.s_prime, spec, search).value;
        rep.ratios.push_back(std::abs(v1 - v2) / denom);
        rep.max_ratio = std::max(rep.max_ratio, rep.ratios.back());
    }
    return rep;
}

double hamiltonian(double t, const GridDensity& rho, const MortensenDerivative& d,
                   const RelaxedControl& alpha, const ProblemSpec& spec) {
    require_same_grid(rho.grid, d.grid);
    const Grid& g = rho.grid;
    const Vec dF = central_diff(d.F, g.h);
    const Vec drho = central_diff(rho.values, g.h);
    const Vec wq = trapezoid_weights(g);
    double drift_term = 0.0, f_term = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (rho.values[i] != 0.0) {
            const double b = apply_relaxed(
                [&](const ControlAtom& u) { return spec.drift(t, x, rho, u); }, spec.atoms,
                alpha);
            const double f = apply_relaxed(
                [&](const ControlAtom& u) { return spec.running_cost(t, x, rho, u); },
                spec.atoms, alpha);
            drift_term += b * dF[i] * rho.values[i] * wq[i];
            f_term += f * rho.values[i] * wq[i];
        }
    }
    const double diff_term = -0.5 * spec.sigma * spec.sigma * (dF * drho * wq).sum();
    return drift_term + diff_term + f_term;
}

MinHamiltonian min_hamiltonian(double t, const GridDensity& rho, const MortensenDerivative& d,
                               const ProblemSpec& spec) {
    MinHamiltonian out;
    out.value = std::numeric_limits<double>::infinity();
    const int m = static_cast<int>(spec.atoms.size());
    for (int j = 0; j < m; ++j) {
        const double h = hamiltonian(t, rho, d, RelaxedControl::pure(j, m), spec);
        if (h < out.value) {
            out.value = h;
            out.argmin_atom = j;
        }
    }
    return out;
}

std::vector<Vec> probe_basis(const Grid& grid, const DerivativeProbeConfig& probe) {
    std::vector<Vec> basis;
    basis.reserve(probe.n_bumps);
    for (int m = 0; m < probe.n_bumps; ++m) {
        const double c = probe.n_bumps == 1
                             ? 0.5 * (probe.center_lo + probe.center_hi)
                             : probe.center_lo +
                                   (probe.center_hi - probe.center_lo) * m / (probe.n_bumps - 1);
        basis.push_back(gaussian_difference_bump(grid, c, c + probe.offset, probe.width));
    }
    return basis;
}

HjbResidualReport hjb_residual(const ValueRule& v_eval, double t, const GridDensity& rho,
                               const ProblemSpec& spec, const WeightField& w,
                               const DerivativeProbeConfig& probe) {
    require_same_grid(rho.grid, w.grid);
    HjbResidualReport rep;

    // time derivative by central differences, one-sided near the ends
    const double dtp = probe.dt_time;
    const double t_lo = std::max(0.0, t - dtp);
    const double t_hi = std::min(spec.horizon, t + dtp);
    rep.dt_value = (v_eval(t_hi, rho) - v_eval(t_lo, rho)) / (t_hi - t_lo);

    // Mortensen-derivative component by ridge regression on the probe basis
    const std::vector<Vec> basis = probe_basis(rho.grid, probe);
    const int m = static_cast<int>(basis.size());
    const Vec wq = trapezoid_weights(rho.grid);
    Eigen::MatrixXd gram(m, m);
    Eigen::VectorXd y(m);
    const double v0 = v_eval(t, rho);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b <= a; ++b) {
            gram(a, b) = (basis[a] * basis[b] * wq).sum();
            gram(b, a) = gram(a, b);
        }
        GridDensity perturbed(rho.grid, rho.values + probe.eps * basis[a], /*validate=*/false);
        y[a] = (v_eval(t, perturbed) - v0) / probe.eps;
    }
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        rep.probe_condition = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
        rep.ill_conditioned = !(lo > probe.ridge * 1e3);
    }
    Eigen::MatrixXd reg = gram + probe.ridge * Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd coef = reg.ldlt().solve(y);
    Vec F = Vec::Zero(rho.grid.n);
    for (int a = 0; a < m; ++a) F += coef[a] * basis[a];
    const MortensenDerivative d{rho.grid, std::move(F), Vec::Zero(rho.grid.n)};

    const MinHamiltonian mh = min_hamiltonian(t, rho, d, spec);
    rep.ham_min = mh.value;
    rep.argmin_atom = mh.argmin_atom;
    rep.residual = -rep.dt_value - rep.ham_min;
    return rep;
}

SmoothnessReport check_c11_smoothness(const TestFunctional& tf, double t,
                                      const GridDensity& rho, const WeightField& w) {
    SmoothnessReport rep;
    const Grid& g = rho.grid;
    const Vec wq = trapezoid_weights(g);
    const MortensenDerivative d0 = tf.derivative(t, rho);
    const Vec dF0 = central_diff(d0.F, g.h);
    rep.grad_energy = (dF0.square() / w.gamma * wq).sum();

    // continuity of the gradient energy under shrinking H12 perturbations
    const Vec bump = gaussian_difference_bump(g, -0.5, 0.5, 0.5);
    const std::array<double, 3> eps{1e-1, 1e-2, 1e-3};
    for (std::size_t k = 0; k < eps.size(); ++k) {
        GridDensity pert(g, rho.values + eps[k] * bump, /*validate=*/false);
        const MortensenDerivative dk = tf.derivative(t, pert);
        const Vec diff = central_diff(dk.F - d0.F, g.h);
        rep.continuity_gaps[k] = (diff.square() / w.gamma * wq).sum();
    }
    rep.pass = std::isfinite(rep.grad_energy) &&
               rep.continuity_gaps[2] <= rep.continuity_gaps[1] + 1e-15 &&
               rep.continuity_gaps[1] <= rep.continuity_gaps[0] + 1e-15;
    return rep;
}

ViscosityReport check_viscosity(const ValueRule& u, const TestFunctional& psi,
                                const std::vector<std::pair<double, GridDensity>>& probes,
                                bool subsolution, const ProblemSpec& spec, double tol) {
    ViscosityReport rep;
    double best = subsolution ? -std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double gap = u(probes[i].first, probes[i].second) -
                           psi.eval(probes[i].first, probes[i].second);
        const bool better = subsolution ? gap > best : gap < best;
        if (better) {
            best = gap;
            rep.probe_index = static_cast<int>(i);
        }
    }
    rep.touching_value = best;
    const auto& [t0, rho0] = probes[rep.probe_index];
    const MortensenDerivative d = psi.derivative(t0, rho0);
    rep.lhs = -psi.time_derivative(t0, rho0) - min_hamiltonian(t0, rho0, d, spec).value;
    rep.pass = subsolution ? rep.lhs <= tol : rep.lhs >= -tol;
    return rep;
}

}  // namespace mfhjb
