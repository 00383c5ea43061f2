#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfhjb/grid.hpp"
#include "mfhjb/weight.hpp"

namespace mfhjb {

inline constexpr double kMassTol = 1e-6;
inline constexpr double kBoundaryMassTol = 1e-8;

/// Probability density tabulated on a grid; the computational stand-in for a
/// density of finite exponentially weighted Sobolev energy.
struct GridDensity {
    Grid grid;
    Vec values;
    double weighted_energy = 0.0;  // (rho^2 + (Drho)^2) gamma integral

    GridDensity() = default;

    GridDensity(const Grid& g, Vec v, bool validate = true)
        : grid(g), values(std::move(v)) {
        require_length(values, grid);
        const WeightField w = build_weight(grid);
        weighted_energy = weighted_h12_sq(values, w);
        if (validate) {
            if ((values < 0.0).any())
                throw std::invalid_argument("GridDensity: negative values");
            const double mass = trapezoid(values, grid);
            if (std::abs(mass - 1.0) > kMassTol)
                throw std::invalid_argument("GridDensity: mass " + std::to_string(mass) +
                                            " outside unit tolerance");
            if (values[0] > kBoundaryMassTol || values[grid.n - 1] > kBoundaryMassTol)
                throw std::invalid_argument("GridDensity: boundary mass above threshold");
        }
    }

    double mass() const { return trapezoid(values, grid); }
};

struct ParticleEnsemble {
    Eigen::VectorXd positions;  // N particles, d = 1
    std::uint64_t seed = 0;

    ParticleEnsemble() = default;
    ParticleEnsemble(Eigen::VectorXd pos, std::uint64_t s)
        : positions(std::move(pos)), seed(s) {
        if (positions.size() < 100)
            throw std::invalid_argument("ParticleEnsemble: need at least 100 particles");
        if (!positions.allFinite())
            throw std::invalid_argument("ParticleEnsemble: non-finite positions");
    }
};

GridDensity gaussian_density(double mean, double var, const Grid& grid);

/// Gaussian-kernel density estimate of an ensemble, renormalized on the grid.
GridDensity kde(const ParticleEnsemble& ensemble, double bandwidth, const Grid& grid);

double silverman_bandwidth(const ParticleEnsemble& ensemble);

struct MembershipReport {
    double mass_error = 0.0;
    double min_value = 0.0;
    double weighted_energy = 0.0;
    bool negativity = false;
    bool boundary_mass = false;
    bool mass_defect = false;
    bool pass = false;
};

MembershipReport check_d1r_membership(const Grid& grid, const Vec& values,
                                      const WeightField& w);

inline MembershipReport check_d1r_membership(const GridDensity& rho, const WeightField& w) {
    return check_d1r_membership(rho.grid, rho.values, w);
}

// ---- probability distances (d = 1) ----

/// Exact 1-D Wasserstein-1 distance via the CDF formula.
double wasserstein1(const GridDensity& rho, const GridDensity& chi);

double total_variation(const GridDensity& rho, const GridDensity& chi);

struct W1BoundReport {
    double w1 = 0.0;
    double rhs = 0.0;  // kappa4 * ||rho - chi||_{L2(gamma)}
    bool holds = false;
};

/// Checks W1 <= kappa4 ||rho - chi||_{L2(gamma)} with grid slack 4h.
W1BoundReport check_w1_weighted_bound(const GridDensity& rho, const GridDensity& chi,
                                      const WeightField& w);

// ---- CSV serialization ----

void save_density_csv(const GridDensity& rho, const std::string& path);
GridDensity load_density_csv(const std::string& path);
void save_ensemble_csv(const ParticleEnsemble& e, const std::string& path);
ParticleEnsemble load_ensemble_csv(const std::string& path);

}  // namespace mfhjb
