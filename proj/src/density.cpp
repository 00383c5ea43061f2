#include "mfhjb/density.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mfhjb {

GridDensity gaussian_density(double mean, double var, const Grid& grid) {
    if (var <= 0.0)
        throw std::invalid_argument("gaussian_density: variance must be positive");
    const double sd = std::sqrt(var);
    if (mean - 6.0 * sd < grid.lower + 1.0 || mean + 6.0 * sd > grid.upper - 1.0)
        throw std::invalid_argument("gaussian_density: insufficient grid coverage");
    const Vec x = grid.nodes();
    Vec v = (-(x - mean).square() / (2.0 * var)).exp();
    v /= trapezoid(v, grid);
    return GridDensity(grid, std::move(v));
}

double silverman_bandwidth(const ParticleEnsemble& ensemble) {
    const auto& p = ensemble.positions;
    const double n = static_cast<double>(p.size());
    const double mean = p.mean();
    const double sd = std::sqrt((p.array() - mean).square().sum() / (n - 1.0));
    return 1.06 * sd * std::pow(n, -0.2);
}

GridDensity kde(const ParticleEnsemble& ensemble, double bandwidth, const Grid& grid) {
    if (bandwidth <= 0.0)
        throw std::invalid_argument("kde: bandwidth must be positive");
    const Eigen::Index n_particles = ensemble.positions.size();
    // Linear (cloud-in-cell) deposit onto the grid, then convolution with a
    // discrete Gaussian kernel. Equivalent to the direct sum up to O(h^2).
    Vec hist = Vec::Zero(grid.n);
    for (Eigen::Index p = 0; p < n_particles; ++p) {
        const double xi = (ensemble.positions[p] - grid.lower) / grid.h;
        const int i0 = std::clamp(static_cast<int>(std::floor(xi)), 0, grid.n - 2);
        const double frac = std::clamp(xi - i0, 0.0, 1.0);
        hist[i0] += (1.0 - frac);
        hist[i0 + 1] += frac;
    }
    hist /= (static_cast<double>(n_particles) * grid.h);
    // kernel support truncated at 6 bandwidths
    const int half = std::min(grid.n - 1, static_cast<int>(std::ceil(6.0 * bandwidth / grid.h)));
    Vec kernel(2 * half + 1);
    for (int k = -half; k <= half; ++k)
        kernel[k + half] = std::exp(-0.5 * (k * grid.h) * (k * grid.h) / (bandwidth * bandwidth));
    kernel /= kernel.sum();
    Vec v = Vec::Zero(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        if (hist[i] == 0.0) continue;
        const int lo = std::max(0, i - half);
        const int hi = std::min(grid.n - 1, i + half);
        for (int j = lo; j <= hi; ++j)
            v[j] += hist[i] * kernel[j - i + half];
    }
    v /= trapezoid(v, grid);
    // clip truncation dust at the boundary so the hygiene invariant holds
    v[0] = std::min(v[0], kBoundaryMassTol * 0.1);
    v[grid.n - 1] = std::min(v[grid.n - 1], kBoundaryMassTol * 0.1);
    v /= trapezoid(v, grid);
    return GridDensity(grid, std::move(v));
}

MembershipReport check_d1r_membership(const Grid& grid, const Vec& values,
                                      const WeightField& w) {
    require_same_grid(grid, w.grid);
    MembershipReport r;
    r.mass_error = std::abs(trapezoid(values, grid) - 1.0);
    r.min_value = values.minCoeff();
    r.weighted_energy = weighted_h12_sq(values, w);
    r.negativity = r.min_value < 0.0;
    r.boundary_mass = values[0] > kBoundaryMassTol || values[grid.n - 1] > kBoundaryMassTol;
    r.mass_defect = r.mass_error > kMassTol;
    r.pass = !r.negativity && !r.boundary_mass && !r.mass_defect &&
             std::isfinite(r.weighted_energy);
    return r;
}

double wasserstein1(const GridDensity& rho, const GridDensity& chi) {
    require_same_grid(rho.grid, chi.grid);
    const Vec F = cumulative_trapezoid(rho.values, rho.grid);
    const Vec G = cumulative_trapezoid(chi.values, chi.grid);
    return trapezoid((F - G).abs(), rho.grid);
}

double total_variation(const GridDensity& rho, const GridDensity& chi) {
    require_same_grid(rho.grid, chi.grid);
    return trapezoid((rho.values - chi.values).abs(), rho.grid);
}

W1BoundReport check_w1_weighted_bound(const GridDensity& rho, const GridDensity& chi,
                                      const WeightField& w) {
    require_same_grid(rho.grid, chi.grid);
    require_same_grid(rho.grid, w.grid);
    W1BoundReport r;
    r.w1 = wasserstein1(rho, chi);
    r.rhs = w.kappa4 * weighted_l2_norm(rho.values - chi.values, w);
    r.holds = r.w1 <= r.rhs + 4.0 * rho.grid.h;
    return r;
}

void save_density_csv(const GridDensity& rho, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "x,value\n";
    for (int i = 0; i < rho.grid.n; ++i)
        out << rho.grid.x(i) << "," << rho.values[i] << "\n";
}

GridDensity load_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> xs, vs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        xs.push_back(std::stod(a));
        vs.push_back(std::stod(b));
    }
    if (xs.size() < 16) throw std::runtime_error("density csv too short: " + path);
    Grid g = Grid::make(xs.front(), xs.back(), static_cast<int>(xs.size()));
    Vec v = Eigen::Map<Vec>(vs.data(), static_cast<Eigen::Index>(vs.size()));
    return GridDensity(g, std::move(v));
}

void save_ensemble_csv(const ParticleEnsemble& e, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "# seed=" << e.seed << "\n";
    for (Eigen::Index i = 0; i < e.positions.size(); ++i)
        out << e.positions[i] << "\n";
}

ParticleEnsemble load_ensemble_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::uint64_t seed = 0;
    if (line.rfind("# seed=", 0) == 0) seed = std::stoull(line.substr(7));
    std::vector<double> xs;
    while (std::getline(in, line))
        if (!line.empty()) xs.push_back(std::stod(line));
    Eigen::VectorXd pos = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    return ParticleEnsemble(pos, seed);
}

}  // namespace mfhjb
