#pragma once

#include "mfhjb/control.hpp"

namespace mfhjb {

struct FiniteMetricSpace {
    Eigen::MatrixXd dist;

    static FiniteMetricSpace make(Eigen::MatrixXd d);
    int size() const { return static_cast<int>(dist.rows()); }
};

struct BPCertificate {
    bool limit_ok = false;       // d(y_k, y_eps) -> 0 along the sequence
    bool sup_dist_ok = false;    // sup_k d(y_k, y_eps) <= eps^{1/4}
    bool start_dist_ok = false;  // d(y_eps, y0) <= eps^{1/4}
    bool value_ok = false;       // F(y_eps) >= max F - eps
    bool perturbed_max_ok = false;  // F - sqrt(eps) Delta maximized at y_eps
    double sup_dist = 0.0;
    double start_dist = 0.0;
    double value_slack = 0.0;
    double perturbed_slack = 0.0;
    bool pass = false;
};

struct BPResult {
    int y_eps = 0;
    std::vector<int> y_k;
    Vec beta;   // weights over y_k, nonnegative, summing to 1
    Vec delta;  // Delta(y) = sum_k beta_k d(y, y_k)^2 for every point
    BPCertificate certificate;
};

/// Constructive Borwein-Preiss iteration on a finite metric space: greedy
/// stage-wise maximization of F - sqrt(eps) * accumulated quadratic penalty
/// with geometric weights. All conclusions are re-verified post hoc.
BPResult borwein_preiss(const FiniteMetricSpace& space, const Vec& F, double eps, int y0);

struct DoublingParams {
    double alpha_tilde = 0.5;
    double beta = 0.01;
    double lambda = 0.01;
    double theta = 0.1;
    double eta = 0.1;
    double eps = 1e-4;
    double horizon = 1.0;

    void validate() const;
};

/// The doubling-of-variables auxiliary function Phi(t, s, rho, chi).
double build_phi(double t, double s, const GridDensity& rho, const GridDensity& chi,
                 const ValueRule& w_eval, const ValueRule& v_eval, const DoublingParams& p,
                 const WeightField& w);

struct DoublingRow {
    double theta = 0.0;
    double t_eps = 0.0;
    double s_eps = 0.0;
    int rho_index = 0;
    int chi_index = 0;
    double h5_lhs = 0.0;
    double h5_rhs = 0.0;
    double h8_quantity = 0.0;  // |t - s|^2 + ||rho - chi||^2_{H12(gamma)}
    double h9_quantity = 0.0;  // h8 / theta
    bool h5_pass = false;
    bool bp_pass = false;
    bool hit_terminal = false;  // t v s = T (Case 1 observed)
};

struct DoublingReport {
    std::vector<DoublingRow> rows;
    double bound_m = 0.0;   // sup |W|, |V| over the probe set
    double bound_m1 = 0.0;  // 2M + 10 ||rho_0||^2 + 2 + 8 T^2
    double h9_slack = 0.0;
    bool h8_monotone = false;
    bool h9_pass = false;
    bool pass = false;
};

/// Exhaustive maximization of Phi - sqrt(eps) Delta over the finite product
/// space (time grid)^2 x dictionary^2 for a sweep of theta values, reproducing
/// the quantitative estimates of the comparison-principle argument.
DoublingReport doubling_experiment(const ValueRule& w_eval, const ValueRule& v_eval,
                                   const std::vector<GridDensity>& dictionary,
                                   const std::vector<double>& time_grid,
                                   const std::vector<double>& thetas, DoublingParams params,
                                   const WeightField& w);

/// Max over the probe set of W - V.
double comparison_gap(const ValueRule& w_eval, const ValueRule& v_eval,
                      const std::vector<std::pair<double, GridDensity>>& probes);

void save_doubling_csv(const DoublingReport& rep, const std::string& path);

}  // namespace mfhjb
