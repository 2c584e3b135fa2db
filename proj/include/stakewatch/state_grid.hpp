#pragma once

#include <Eigen/Dense>

#include "stakewatch/model_spec.hpp"

namespace stakewatch {

// Uniform discretization of the latent state space over [-bound, bound].
struct StateGrid {
    int m = 0;
    double bound = 0.0;
    double h = 0.0;
    Eigen::VectorXd boundaries;  // m + 1
    Eigen::VectorXd midpoints;   // m
};

StateGrid build_grid(int m, double bound);
StateGrid build_grid(const ModelSpec& spec);

// Midpoint-rule transition matrix: gamma_ij = h * N(b_j* ; phi b_i* + d, sigma_s).
// Rows are deliberately not renormalized; the truncated mass is reported.
struct TransitionMatrix {
    Eigen::MatrixXd gamma;        // m x m, row i -> column j
    double shift = 0.0;           // the covariate shift d it was built with
    double max_truncation = 0.0;  // max over rows of 1 - row sum (clamped at 0)
    double truncation_bound = 0.0;  // analytic bound 2(1 - Phi((B - |phi|B - |d|)/sigma_s))
};

TransitionMatrix transition_matrix(const StateGrid& grid, double shift,
                                   const ParameterSet& theta);

// Discretized stationary law N(0, sigma_s^2/(1-phi^2)), renormalized to sum 1.
Eigen::VectorXd initial_distribution(const StateGrid& grid, const ParameterSet& theta);

struct TransitionScratch {
    Eigen::VectorXd weighted;
    Eigen::VectorXd mixed;
    Eigen::MatrixXd dense;  // fallback path only
};

// Applies Gamma(d)^T without rebuilding the matrix per shift. The covariate
// shift factorizes exactly:
//   gamma_ij(d) = c(d) * v_i(d) * gamma_ij(0) * u_j(d)
// with u_j = exp(d b_j*/sigma_s^2), v_i = exp(-d phi b_i*/sigma_s^2) and
// c = exp(-d^2/(2 sigma_s^2)), so one fixed matrix serves every minute.
// A dense rebuild kicks in when the split exponents could overflow.
class TransitionKernel {
public:
    TransitionKernel(const StateGrid& grid, const ParameterSet& theta);

    // w = Gamma(shift)^T a. Safe for concurrent use with per-thread scratch.
    void apply_transposed(double shift, const Eigen::VectorXd& a, Eigen::VectorXd& w,
                          TransitionScratch& scratch) const;

    const Eigen::MatrixXd& gamma0_transposed() const { return g0t_; }
    const StateGrid& grid() const { return grid_; }

private:
    StateGrid grid_;
    double phi_;
    double inv_var_;  // 1 / sigma_s^2
    double exponent_cap_;
    Eigen::MatrixXd g0t_;  // Gamma(0) transposed: g0t_(j, i) = gamma_ij(0)
};

} // namespace stakewatch
