#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace mfhjb {

using Vec = Eigen::ArrayXd;

/// Uniform 1-D grid on [lower, upper] with n nodes.
struct Grid {
    double lower = -8.0;
    double upper = 8.0;
    int n = 0;
    double h = 0.0;

    static Grid make(double lower, double upper, int n) {
        if (n < 16)
            throw std::invalid_argument("Grid: need at least 16 nodes");
        if (!(lower < -2.0 && upper > 2.0))
            throw std::invalid_argument("Grid: domain must contain (-2, 2) strictly");
        Grid g;
        g.lower = lower;
        g.upper = upper;
        g.n = n;
        g.h = (upper - lower) / (n - 1);
        return g;
    }

    double x(int i) const { return lower + i * h; }

    Vec nodes() const {
        return Vec::LinSpaced(n, lower, upper);
    }

    bool operator==(const Grid& o) const {
        return lower == o.lower && upper == o.upper && n == o.n;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline void require_same_grid(const Grid& a, const Grid& b) {
    if (a != b)
        throw std::invalid_argument("grid mismatch");
}

inline void require_length(const Vec& v, const Grid& g) {
    if (v.size() != g.n)
        throw std::invalid_argument("vector length does not match grid");
}

/// Central differences in the interior, one-sided at the two endpoints.
inline Vec central_diff(const Vec& v, double h) {
    const Eigen::Index n = v.size();
    Vec d(n);
    d[0] = (v[1] - v[0]) / h;
    d[n - 1] = (v[n - 1] - v[n - 2]) / h;
    d.segment(1, n - 2) = (v.tail(n - 2) - v.head(n - 2)) / (2.0 * h);
    return d;
}

/// Trapezoid quadrature weights (h everywhere, h/2 at the ends).
inline Vec trapezoid_weights(const Grid& g) {
    Vec w = Vec::Constant(g.n, g.h);
    w[0] *= 0.5;
    w[g.n - 1] *= 0.5;
    return w;
}

inline double trapezoid(const Vec& f, const Grid& g) {
    require_length(f, g);
    return (f * trapezoid_weights(g)).sum();
}

/// Cumulative trapezoid sums: out[i] = integral of f over [lower, x_i].
inline Vec cumulative_trapezoid(const Vec& f, const Grid& g) {
    require_length(f, g);
    Vec out(g.n);
    out[0] = 0.0;
    for (int i = 1; i < g.n; ++i)
        out[i] = out[i - 1] + 0.5 * g.h * (f[i - 1] + f[i]);
    return out;
}

}  // namespace mfhjb
