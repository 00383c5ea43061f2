#include "mfhjb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mfhjb/rng.hpp"

namespace mfhjb {

namespace {

int sample_atom(const RelaxedControl& ctrl, double u) {
    double acc = 0.0;
    const int m = static_cast<int>(ctrl.weights.size());
    for (int j = 0; j < m; ++j) {
        acc += ctrl.weights[j];
        if (u <= acc) return j;
    }
    return m - 1;
}

}  // namespace

double apply_relaxed(const std::function<double(const ControlAtom&)>& coef,
                     const std::vector<ControlAtom>& atoms, const RelaxedControl& alpha) {
    if (atoms.empty()) throw std::invalid_argument("apply_relaxed: empty atom set");
    if (static_cast<std::size_t>(alpha.weights.size()) != atoms.size())
        throw std::invalid_argument("apply_relaxed: weight/atom size mismatch");
    double out = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j)
        if (alpha.weights[j] != 0.0) out += alpha.weights[j] * coef(atoms[j]);
    return out;
}

void PolicySchedule::validate() const {
    if (breakpoints.size() < 2 || segments.size() + 1 != breakpoints.size())
        throw std::invalid_argument("PolicySchedule: breakpoints/segments mismatch");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (breakpoints[i] <= breakpoints[i - 1])
            throw std::invalid_argument("PolicySchedule: breakpoints not increasing");
}

const SegmentControl& PolicySchedule::at(double t) const {
    if (t < breakpoints.front() - 1e-12 || t > breakpoints.back() + 1e-12)
        throw std::invalid_argument("PolicySchedule: time outside schedule");
    for (std::size_t i = 1; i + 1 < breakpoints.size(); ++i)
        if (t < breakpoints[i]) return segments[i - 1];
    return segments.back();
}

Vec drift_field(double t, const GridDensity& rho, const SegmentControl& control,
                const ProblemSpec& spec) {
    Vec b(rho.grid.n);
    if (const auto* rc = std::get_if<RelaxedControl>(&control)) {
        for (int i = 0; i < rho.grid.n; ++i) {
            const double x = rho.grid.x(i);
            b[i] = apply_relaxed(
                [&](const ControlAtom& u) { return spec.drift(t, x, rho, u); },
                spec.atoms, *rc);
        }
    } else {
        const auto& table = std::get<FeedbackTable>(control);
        if (static_cast<int>(table.size()) != rho.grid.n)
            throw std::invalid_argument("drift_field: feedback table size mismatch");
        for (int i = 0; i < rho.grid.n; ++i) {
            const double x = rho.grid.x(i);
            b[i] = apply_relaxed(
                [&](const ControlAtom& u) { return spec.drift(t, x, rho, u); },
                spec.atoms, table[i]);
        }
    }
    if (!b.allFinite()) throw std::runtime_error("drift_field: non-finite drift values");
    return b;
}

FPStepResult fokker_planck_step(const GridDensity& rho, double t, double dt,
                                const SegmentControl& control, const ProblemSpec& spec) {
    spec.validate();
    const Grid& g = rho.grid;
    const double h = g.h;
    const Vec b = drift_field(t, rho, control, spec);
    const double max_b = b.abs().maxCoeff();
    const double dt_diff = h * h / (2.0 * spec.sigma * spec.sigma);
    const double dt_adv = max_b > 0.0 ? h / (2.0 * max_b) : std::numeric_limits<double>::infinity();
    if (dt > std::min(dt_diff, dt_adv) * (1.0 + 1e-12))
        throw std::invalid_argument("fokker_planck_step: stability bound violated");

    const Vec& r = rho.values;
    const double half_a = 0.5 * spec.sigma * spec.sigma;
    // face fluxes F_{i+1/2}, i = 0..n-2; zero flux through the boundary
    Vec flux(g.n - 1);
    for (int i = 0; i + 1 < g.n; ++i) {
        const double bf = 0.5 * (b[i] + b[i + 1]);
        const double upw = bf >= 0.0 ? r[i] : r[i + 1];
        flux[i] = half_a * (r[i + 1] - r[i]) / h - bf * upw;
    }
    Vec next(g.n);
    next[0] = r[0] + dt / h * flux[0];
    for (int i = 1; i + 1 < g.n; ++i)
        next[i] = r[i] + dt / h * (flux[i] - flux[i - 1]);
    next[g.n - 1] = r[g.n - 1] - dt / h * flux[g.n - 2];

    FPStepResult out{GridDensity(g, next, /*validate=*/false), 0.0, false};
    const double mass = trapezoid(next, g);
    out.mass_drift = mass - trapezoid(r, g);
    if (std::abs(out.mass_drift) > 1e-12) {
        out.density = GridDensity(g, next / mass, /*validate=*/false);
        out.renormalized = true;
    }
    return out;
}

DensityPath evolve(const GridDensity& rho0, double s, double t, const PolicySchedule& policy,
                   const ProblemSpec& spec, double dt, int n_saves, bool check_membership) {
    policy.validate();
    if (!(s < t) || t > spec.horizon + 1e-12)
        throw std::invalid_argument("evolve: need s < t <= horizon");
    if (policy.breakpoints.front() > s + 1e-12 || policy.breakpoints.back() < t - 1e-12)
        throw std::invalid_argument("evolve: policy does not cover [s, t]");

    const int nsteps = std::max(1, static_cast<int>(std::ceil((t - s) / dt - 1e-12)));
    const double step = (t - s) / nsteps;
    const WeightField w = build_weight(rho0.grid);

    DensityPath path;
    const int saves = std::max(2, std::min(n_saves, nsteps + 1));
    // evenly spaced save indices, both endpoints included
    std::vector<bool> save_at(nsteps + 1, false);
    for (int j = 0; j < saves; ++j)
        save_at[static_cast<int>(std::llround(static_cast<double>(j) * nsteps / (saves - 1)))] =
            true;
    auto maybe_save = [&](int k, const GridDensity& rho) {
        if (!save_at[k]) return;
        path.times.push_back(s + k * step);
        path.densities.push_back(rho);
        path.membership.push_back(check_d1r_membership(rho, w));
        if (check_membership && !path.membership.back().pass)
            throw std::runtime_error("evolve: conservativity violation at t = " +
                                     std::to_string(s + k * step));
    };

    GridDensity rho = rho0;
    maybe_save(0, rho);
    for (int k = 0; k < nsteps; ++k) {
        const double r = s + k * step;
        FPStepResult res = fokker_planck_step(rho, r, step, policy.at(r), spec);
        path.mass_drifts.push_back(res.mass_drift);
        rho = std::move(res.density);
        maybe_save(k + 1, rho);
    }
    return path;
}

GridDensity heat_oracle(const GridDensity& rho0, double s, double t, double sigma) {
    if (!(t > s)) throw std::invalid_argument("heat_oracle: need t > s");
    const Grid& g = rho0.grid;
    const double var = sigma * sigma * (t - s);
    const double sd = std::sqrt(var);
    const int half = std::min(g.n - 1, static_cast<int>(std::ceil(8.0 * sd / g.h)) + 1);
    Vec kernel(2 * half + 1);
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * var);
    for (int k = -half; k <= half; ++k)
        kernel[k + half] = norm * std::exp(-0.5 * (k * g.h) * (k * g.h) / var);
    const Vec wq = trapezoid_weights(g);
    Vec out = Vec::Zero(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double m = rho0.values[i] * wq[i];
        if (m == 0.0) continue;
        const int lo = std::max(0, i - half);
        const int hi = std::min(g.n - 1, i + half);
        for (int j = lo; j <= hi; ++j)
            out[j] += m * kernel[j - i + half];
    }
    out[0] = std::min(out[0], kBoundaryMassTol * 0.1);
    out[g.n - 1] = std::min(out[g.n - 1], kBoundaryMassTol * 0.1);
    out /= trapezoid(out, g);
    return GridDensity(g, std::move(out), /*validate=*/false);
}

ParticleEnsemble particle_simulate(const GridDensity& rho0, double s, double t,
                                   const PolicySchedule& policy, const ProblemSpec& spec,
                                   int n_particles, std::uint64_t seed, double dt) {
    spec.validate();
    policy.validate();
    if (n_particles < 100)
        throw std::invalid_argument("particle_simulate: need at least 100 particles");
    const Grid& g = rho0.grid;

    // inverse-CDF sampling of the initial positions
    Vec cdf = cumulative_trapezoid(rho0.values, g);
    cdf /= cdf[g.n - 1];
    auto sample_initial = [&](double u) {
        const double* lo = std::lower_bound(cdf.data(), cdf.data() + g.n, u);
        int i = std::clamp(static_cast<int>(lo - cdf.data()), 1, g.n - 1);
        const double c0 = cdf[i - 1], c1 = cdf[i];
        const double frac = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.5;
        return g.x(i - 1) + frac * g.h;
    };

    std::vector<RngStream> streams;
    streams.reserve(n_particles);
    Eigen::VectorXd pos(n_particles);
    for (int p = 0; p < n_particles; ++p) {
        streams.emplace_back(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(p) + 1));
        pos[p] = sample_initial(streams[p].uniform());
    }

    const int nsteps = std::max(1, static_cast<int>(std::ceil((t - s) / dt - 1e-12)));
    const double step = (t - s) / nsteps;
    const double sq = spec.sigma * std::sqrt(step);

    for (int k = 0; k < nsteps; ++k) {
        const double r = s + k * step;
        ParticleEnsemble snapshot(pos, seed);
        const GridDensity rho = kde(snapshot, silverman_bandwidth(snapshot), g);
        const SegmentControl& control = policy.at(r);
        const auto* rc = std::get_if<RelaxedControl>(&control);
        const auto* table = rc ? nullptr : &std::get<FeedbackTable>(control);
        for (int p = 0; p < n_particles; ++p) {
            const RelaxedControl& ctrl =
                rc ? *rc
                   : (*table)[std::clamp(
                         static_cast<int>(std::round((pos[p] - g.lower) / g.h)), 0, g.n - 1)];
            const int j = sample_atom(ctrl, streams[p].uniform());
            const double b = spec.drift(r, pos[p], rho, spec.atoms[j]);
            pos[p] += b * step + sq * streams[p].normal();
            if (!std::isfinite(pos[p]))
                throw std::runtime_error("particle_simulate: non-finite position, particle " +
                                         std::to_string(p) + " at t = " + std::to_string(r));
        }
    }
    return ParticleEnsemble(std::move(pos), seed);
}

GaussianBoundReport gaussian_bound_check(const GridDensity& rho0, const PolicySchedule& policy,
                                         const ProblemSpec& spec, double t,
                                         std::uint64_t seed, int n_particles) {
    const Grid& g = rho0.grid;
    const double s = policy.breakpoints.front();
    const double tau = t - s;
    if (tau <= 0.0) throw std::invalid_argument("gaussian_bound_check: need t past policy start");

    const double centers[] = {-1.0, 0.0, 1.0};
    std::vector<double> zs, logs;
    for (double x0 : centers) {
        const GridDensity bump = gaussian_density(x0, 0.01, g);
        const ParticleEnsemble end =
            particle_simulate(bump, s, t, policy, spec, n_particles, seed);
        const GridDensity p = kde(end, silverman_bandwidth(end), g);
        const double pmax = p.values.maxCoeff();
        for (int i = 0; i < g.n; ++i) {
            if (p.values[i] < 0.05 * pmax) continue;
            const double dy = g.x(i) - x0;
            zs.push_back(dy * dy / tau);
            logs.push_back(std::log(p.values[i] * std::sqrt(tau)));
        }
    }

    GaussianBoundReport rep;
    const std::size_t m = zs.size();
    if (m < 10) {
        rep.degenerate = true;
        return rep;
    }
    // least squares: log(p sqrt(tau)) = a - kappa2 z
    double sz = 0, sl = 0, szz = 0, szl = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sz += zs[i];
        sl += logs[i];
        szz += zs[i] * zs[i];
        szl += zs[i] * logs[i];
    }
    const double denom = m * szz - sz * sz;
    if (denom <= 0.0) {
        rep.degenerate = true;
        return rep;
    }
    const double slope = (m * szl - sz * sl) / denom;
    const double a = (sl - slope * sz) / m;
    if (slope >= 0.0) {
        rep.degenerate = true;
        return rep;
    }
    rep.kappa2 = -slope;
    const double zmax = *std::max_element(zs.begin(), zs.end());
    // minimal kappa1 making both envelopes hold along the fitted line, with a
    // factor-2 slack absorbing non-Gaussian distortion from the drift
    const double k1_upper = std::exp(a);
    const double k1_lower = std::exp(-a + std::max(0.0, rep.kappa2 - 1.0 / rep.kappa2) * zmax);
    rep.kappa1 = 2.0 * std::max(k1_upper, k1_lower);

    for (std::size_t i = 0; i < m; ++i) {
        const double p = std::exp(logs[i]);  // p sqrt(tau)
        const double upper = rep.kappa1 * std::exp(-rep.kappa2 * zs[i]);
        const double lower = std::exp(-zs[i] / rep.kappa2) / rep.kappa1;
        rep.max_violation = std::max({rep.max_violation, (p - upper) / upper, (lower - p) / lower});
    }
    rep.max_violation = std::max(rep.max_violation, 0.0);
    rep.pass = rep.max_violation <= 0.05;
    return rep;
}

BoundCheckReport check_problem_bounds(const ProblemSpec& spec, const Grid& grid,
                                      int samples, std::uint64_t seed) {
    spec.validate();
    if (samples < 1) throw std::invalid_argument("check_problem_bounds: need samples >= 1");
    BoundCheckReport rep;
    RngStream rng(seed);
    for (int k = 0; k < samples; ++k) {
        const double t = spec.horizon * rng.uniform();
        const double x = grid.lower + (grid.upper - grid.lower) * rng.uniform();
        const GridDensity rho =
            gaussian_density(-1.0 + 2.0 * rng.uniform(), 0.15 + 0.3 * rng.uniform(), grid);
        const ControlAtom& u =
            spec.atoms[static_cast<std::size_t>(spec.atoms.size() * 0.999 * rng.uniform())];
        rep.max_drift = std::max(rep.max_drift, std::abs(spec.drift(t, x, rho, u)));
        rep.max_cost = std::max(rep.max_cost, std::abs(spec.running_cost(t, x, rho, u)) +
                                                  std::abs(spec.terminal_cost(x, rho)));
    }
    rep.drift_ok = rep.max_drift <= spec.bound_k2 + 1e-12;
    rep.cost_ok = rep.max_cost <= spec.bound_k3 + 1e-12;
    return rep;
}

void save_path_csv(const DensityPath& path, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file);
    out.precision(17);
    out << "t,x,value\n";
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        const GridDensity& rho = path.densities[k];
        for (int i = 0; i < rho.grid.n; ++i)
            out << path.times[k] << "," << rho.grid.x(i) << "," << rho.values[i] << "\n";
    }
}

}  // namespace mfhjb
