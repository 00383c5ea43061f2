#include "mfhjb/mortensen.hpp"

#include <cmath>
#include <fstream>

namespace mfhjb {

DerivativeReport verify_derivative(const Functional& S, const MortensenDerivative& d,
                                   const GridDensity& rho, const std::vector<Vec>& directions,
                                   const WeightField& w) {
    require_same_grid(rho.grid, d.grid);
    DerivativeReport rep;
    rep.r = {0.0, 0.0, 0.0};
    const double S0 = S.eval(rho.values);
    if (!std::isfinite(S0))
        throw std::invalid_argument("verify_derivative: non-finite functional value");
    for (const Vec& phi : directions) {
        require_length(phi, rho.grid);
        const double nphi = weighted_h12_norm(phi, w);
        if (nphi == 0.0) continue;
        const double a = pairing(d, phi);
        for (std::size_t j = 0; j < rep.eps.size(); ++j) {
            const double eps = rep.eps[j];
            const double Se = S.eval(rho.values + eps * phi);
            if (!std::isfinite(Se))
                throw std::invalid_argument("verify_derivative: non-finite functional value");
            const double r = std::abs(Se - S0 - eps * a) / (eps * nphi);
            rep.r[j] = std::max(rep.r[j], r);
        }
    }
    // monotone decay, with a floor so exact-zero remainders count as converged
    const double floor = 1e-12;
    rep.monotone = (rep.r[1] <= rep.r[0] + floor) && (rep.r[2] <= rep.r[1] + floor);
    return rep;
}

Vec gaussian_difference_bump(const Grid& grid, double c1, double c2, double width) {
    const Vec x = grid.nodes();
    const double v = width * width;
    Vec b = (-(x - c1).square() / (2.0 * v)).exp() - (-(x - c2).square() / (2.0 * v)).exp();
    b /= std::sqrt(2.0 * M_PI * v);
    return b;
}

void save_derivative_csv(const MortensenDerivative& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "x,F,G\n";
    for (int i = 0; i < d.grid.n; ++i)
        out << d.grid.x(i) << "," << d.F[i] << "," << d.G[i] << "\n";
}

}  // namespace mfhjb
