#include "mfhjb/variational.hpp"

#include <cmath>
#include <fstream>

namespace mfhjb {

FiniteMetricSpace FiniteMetricSpace::make(Eigen::MatrixXd d) {
    const Eigen::Index n = d.rows();
    if (n == 0 || d.cols() != n)
        throw std::invalid_argument("FiniteMetricSpace: square nonempty matrix required");
    constexpr double tol = 1e-12;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(d(i, i)) > tol)
            throw std::invalid_argument("FiniteMetricSpace: nonzero diagonal");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (d(i, j) < -tol || std::abs(d(i, j) - d(j, i)) > tol)
                throw std::invalid_argument("FiniteMetricSpace: symmetry/nonnegativity violated");
        }
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
                if (d(i, j) > d(i, k) + d(k, j) + tol)
                    throw std::invalid_argument("FiniteMetricSpace: triangle inequality violated");
    FiniteMetricSpace s;
    s.dist = std::move(d);
    return s;
}

BPResult borwein_preiss(const FiniteMetricSpace& space, const Vec& F, double eps, int y0) {
    const int n = space.size();
    if (F.size() != n) throw std::invalid_argument("borwein_preiss: F size mismatch");
    if (eps <= 0.0) throw std::invalid_argument("borwein_preiss: eps must be positive");
    if (y0 < 0 || y0 >= n) throw std::invalid_argument("borwein_preiss: start index out of range");
    const double fmax = F.maxCoeff();
    if (F[y0] < fmax - eps)
        throw std::invalid_argument("borwein_preiss: start point not eps-maximal");

    const double sq = std::sqrt(eps);
    std::vector<int> ys{y0};
    const int max_stages = 20 * n;

    // weights over the current sequence: (1/2)^j with the geometric tail
    // folded onto the last element so they sum to one exactly
    auto weights_for = [](int k) {
        Vec w(k);
        for (int j = 0; j + 1 < k; ++j) w[j] = std::pow(0.5, j + 1);
        w[k - 1] = std::pow(0.5, k - 1);
        return w;
    };
    auto delta_for = [&](const Vec& w) {
        Vec delta = Vec::Zero(n);
        for (std::size_t j = 0; j < ys.size(); ++j)
            for (int y = 0; y < n; ++y) {
                const double d = space.dist(y, ys[j]);
                delta[y] += w[static_cast<int>(j)] * d * d;
            }
        return delta;
    };

    Vec w = weights_for(1);
    Vec delta = delta_for(w);
    bool converged = false;
    for (int stage = 0; stage < max_stages; ++stage) {
        int best = 0;
        double best_v = -std::numeric_limits<double>::infinity();
        for (int y = 0; y < n; ++y) {
            const double v = F[y] - sq * delta[y];
            if (v > best_v + 1e-15) {
                best_v = v;
                best = y;
            }
        }
        if (best == ys.back()) {
            converged = true;
            break;
        }
        ys.push_back(best);
        w = weights_for(static_cast<int>(ys.size()));
        delta = delta_for(w);
    }
    if (!converged)
        throw std::runtime_error("borwein_preiss: no stage-wise convergence");

    BPResult res;
    res.y_k = ys;
    res.beta = w;
    res.delta = delta;
    res.y_eps = ys.back();

    BPCertificate& c = res.certificate;
    const double quarter = std::pow(eps, 0.25);
    c.sup_dist = 0.0;
    for (int yk : ys) c.sup_dist = std::max(c.sup_dist, space.dist(yk, res.y_eps));
    c.start_dist = space.dist(res.y_eps, y0);
    c.limit_ok = space.dist(ys.back(), res.y_eps) <= 1e-12;
    c.sup_dist_ok = c.sup_dist <= quarter + 1e-12;
    c.start_dist_ok = c.start_dist <= quarter + 1e-12;
    c.value_slack = F[res.y_eps] - (fmax - eps);
    c.value_ok = c.value_slack >= -1e-12;
    c.perturbed_slack = std::numeric_limits<double>::infinity();
    const double at_eps = F[res.y_eps] - sq * delta[res.y_eps];
    for (int y = 0; y < n; ++y)
        c.perturbed_slack = std::min(c.perturbed_slack, at_eps - (F[y] - sq * delta[y]));
    c.perturbed_max_ok = c.perturbed_slack >= -1e-12;
    c.pass = c.limit_ok && c.sup_dist_ok && c.start_dist_ok && c.value_ok && c.perturbed_max_ok;
    return res;
}

void DoublingParams::validate() const {
    auto in01 = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in01(alpha_tilde) || !in01(beta) || !in01(lambda) || !in01(theta) || !in01(eps))
        throw std::invalid_argument("DoublingParams: alpha_tilde, beta, lambda, theta, eps in (0,1)");
    if (eta <= 0.0 || horizon <= 0.0)
        throw std::invalid_argument("DoublingParams: eta, horizon must be positive");
}

double build_phi(double t, double s, const GridDensity& rho, const GridDensity& chi,
                 const ValueRule& w_eval, const ValueRule& v_eval, const DoublingParams& p,
                 const WeightField& w) {
    p.validate();
    if (t <= 0.0 || s <= 0.0)
        throw std::invalid_argument("build_phi: t and s must be positive");
    const double T = p.horizon;
    const double nr = weighted_h12_sq(rho.values, w);
    const double nc = weighted_h12_sq(chi.values, w);
    const double fdiff = weighted_h12_sq(rho.values - chi.values, w);
    return w_eval(t, rho) - v_eval(s, chi) -
           p.alpha_tilde * std::exp(p.eta * (2.0 * T - t - s)) * (nr + nc) -
           p.beta * (2.0 * T - s - t) - p.lambda / t - p.lambda / s -
           (fdiff + (t - s) * (t - s)) / (2.0 * p.theta);
}

DoublingReport doubling_experiment(const ValueRule& w_eval, const ValueRule& v_eval,
                                   const std::vector<GridDensity>& dictionary,
                                   const std::vector<double>& time_grid,
                                   const std::vector<double>& thetas, DoublingParams params,
                                   const WeightField& w) {
    params.validate();
    if (params.alpha_tilde <= 4.0 * std::sqrt(params.eps))
        throw std::invalid_argument("doubling_experiment: need alpha_tilde > 4 sqrt(eps)");
    if (dictionary.empty() || time_grid.size() < 2 || thetas.empty())
        throw std::invalid_argument("doubling_experiment: empty probe set");
    const int nd = static_cast<int>(dictionary.size());
    const int nt = static_cast<int>(time_grid.size());
    const double T = params.horizon;

    // pairwise H12(gamma) distances and squared norms of the dictionary
    Eigen::MatrixXd ddist(nd, nd);
    Vec nsq(nd);
    for (int a = 0; a < nd; ++a) {
        nsq[a] = weighted_h12_sq(dictionary[a].values, w);
        for (int b = 0; b <= a; ++b) {
            ddist(a, b) = weighted_h12_norm(dictionary[a].values - dictionary[b].values, w);
            ddist(b, a) = ddist(a, b);
        }
    }

    DoublingReport rep;
    for (int i = 0; i < nt; ++i)
        for (int a = 0; a < nd; ++a) {
            rep.bound_m = std::max(rep.bound_m, std::abs(w_eval(time_grid[i], dictionary[a])));
            rep.bound_m = std::max(rep.bound_m, std::abs(v_eval(time_grid[i], dictionary[a])));
        }
    rep.bound_m1 = 2.0 * rep.bound_m + 10.0 * nsq[0] + 2.0 + 8.0 * T * T;

    // dictionary/time resolution used as slack for the h-9 limit surrogate
    double min_sep = std::numeric_limits<double>::infinity();
    for (int a = 0; a < nd; ++a)
        for (int b = a + 1; b < nd; ++b) min_sep = std::min(min_sep, ddist(a, b) * ddist(a, b));
    for (int i = 0; i + 1 < nt; ++i) {
        const double dt = time_grid[i + 1] - time_grid[i];
        min_sep = std::min(min_sep, dt * dt);
    }
    const double theta_min = *std::min_element(thetas.begin(), thetas.end());
    rep.h9_slack = min_sep / theta_min;

    // flat index over (t_i, s_j, rho_a, chi_b)
    const int total = nt * nt * nd * nd;
    auto unpack = [&](int idx) {
        const int b = idx % nd;
        const int a = (idx / nd) % nd;
        const int j = (idx / (nd * nd)) % nt;
        const int i = idx / (nd * nd * nt);
        return std::array<int, 4>{i, j, a, b};
    };
    Eigen::MatrixXd dist(total, total);
    for (int p = 0; p < total; ++p) {
        const auto [pi, pj, pa, pb] = unpack(p);
        for (int q = 0; q <= p; ++q) {
            const auto [qi, qj, qa, qb] = unpack(q);
            const double dt = time_grid[pi] - time_grid[qi];
            const double ds = time_grid[pj] - time_grid[qj];
            // the product-space metric: squared time gaps, unsquared norm gaps
            const double val =
                std::sqrt(dt * dt + ds * ds + ddist(pa, qa) + ddist(pb, qb));
            dist(p, q) = val;
            dist(q, p) = val;
        }
    }
    // root-of-sum construction satisfies the metric axioms; validated anyway
    const FiniteMetricSpace space = FiniteMetricSpace::make(std::move(dist));

    double prev_h8 = std::numeric_limits<double>::infinity();
    rep.h8_monotone = true;
    for (double theta : thetas) {
        DoublingParams p = params;
        p.theta = theta;
        Vec phi(total);
        for (int idx = 0; idx < total; ++idx) {
            const auto [i, j, a, b] = unpack(idx);
            phi[idx] = build_phi(time_grid[i], time_grid[j], dictionary[a], dictionary[b],
                                 w_eval, v_eval, p, w);
        }
        int y0 = 0;
        phi.maxCoeff(&y0);
        const BPResult bp = borwein_preiss(space, phi, p.eps, y0);
        const auto [i, j, a, b] = unpack(bp.y_eps);

        DoublingRow row;
        row.theta = theta;
        row.t_eps = time_grid[i];
        row.s_eps = time_grid[j];
        row.rho_index = a;
        row.chi_index = b;
        row.h5_lhs = (p.alpha_tilde - 4.0 * std::sqrt(p.eps)) * (nsq[a] + nsq[b]);
        row.h5_rhs = rep.bound_m1;
        row.h5_pass = row.h5_lhs <= row.h5_rhs + 1e-12;
        const double dts = row.t_eps - row.s_eps;
        row.h8_quantity = dts * dts + ddist(a, b) * ddist(a, b);
        row.h9_quantity = row.h8_quantity / theta;
        row.bp_pass = bp.certificate.pass;
        row.hit_terminal = std::max(row.t_eps, row.s_eps) >= T - 1e-12;
        rep.rows.push_back(row);

        if (row.h8_quantity > prev_h8 + 1e-12) rep.h8_monotone = false;
        prev_h8 = row.h8_quantity;
    }
    const DoublingRow& last = rep.rows.back();
    rep.h9_pass = last.h9_quantity <= 4.0 * params.eps + rep.h9_slack + 1e-12;
    rep.pass = rep.h8_monotone && rep.h9_pass &&
               std::all_of(rep.rows.begin(), rep.rows.end(),
                           [](const DoublingRow& r) { return r.h5_pass && r.bp_pass; });
    return rep;
}

double comparison_gap(const ValueRule& w_eval, const ValueRule& v_eval,
                      const std::vector<std::pair<double, GridDensity>>& probes) {
    if (probes.empty()) throw std::invalid_argument("comparison_gap: empty probe set");
    double gap = -std::numeric_limits<double>::infinity();
    for (const auto& [t, rho] : probes)
        gap = std::max(gap, w_eval(t, rho) - v_eval(t, rho));
    return gap;
}

void save_doubling_csv(const DoublingReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "theta,t_eps,s_eps,rho_index,chi_index,h5_lhs,h5_rhs,h8_quantity,h9_quantity,"
           "h5_pass,bp_pass,hit_terminal\n";
    for (const auto& r : rep.rows)
        out << r.theta << "," << r.t_eps << "," << r.s_eps << "," << r.rho_index << ","
            << r.chi_index << "," << r.h5_lhs << "," << r.h5_rhs << "," << r.h8_quantity << ","
            << r.h9_quantity << "," << r.h5_pass << "," << r.bp_pass << "," << r.hit_terminal
            << "\n";
}

}  // namespace mfhjb
