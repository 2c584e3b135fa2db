#include "stakewatch/state_grid.hpp"

#include <cmath>

#include "stakewatch/errors.hpp"
#include "stakewatch/mathutil.hpp"

namespace stakewatch {

StateGrid build_grid(int m, double bound) {
    if (m < 2) throw ConfigError("grid.m must be at least 2");
    if (!(bound > 0.0) || !std::isfinite(bound)) throw ConfigError("grid.bound must be positive and finite");
    StateGrid g;
    g.m = m;
    g.bound = bound;
    g.h = 2.0 * bound / m;
    g.boundaries = Eigen::VectorXd::LinSpaced(m + 1, -bound, bound);
    g.midpoints.resize(m);
    for (int i = 0; i < m; ++i)
        g.midpoints[i] = 0.5 * (g.boundaries[i] + g.boundaries[i + 1]);
    return g;
}

StateGrid build_grid(const ModelSpec& spec) { return build_grid(spec.grid_m, spec.grid_bound); }

TransitionMatrix transition_matrix(const StateGrid& grid, double shift,
                                   const ParameterSet& theta) {
    const int m = grid.m;
    TransitionMatrix tm;
    tm.shift = shift;
    tm.gamma.resize(m, m);
    const double scale = grid.h / (theta.sigma_s * kSqrt2Pi);
    const double inv2var = 0.5 / (theta.sigma_s * theta.sigma_s);
    for (int i = 0; i < m; ++i) {
        const double center = theta.phi * grid.midpoints[i] + shift;
        tm.gamma.row(i) =
            (-(grid.midpoints.array() - center).square() * inv2var).exp() * scale;
    }
    double min_sum = 1.0;
    for (int i = 0; i < m; ++i) min_sum = std::min(min_sum, tm.gamma.row(i).sum());
    tm.max_truncation = std::max(0.0, 1.0 - min_sum);
    const double margin =
        grid.bound - std::abs(theta.phi) * grid.bound - std::abs(shift);
    tm.truncation_bound = std::min(1.0, 2.0 * (1.0 - norm_cdf(margin / theta.sigma_s)));
    return tm;
}

Eigen::VectorXd initial_distribution(const StateGrid& grid, const ParameterSet& theta) {
    if (!(std::abs(theta.phi) < 1.0))
        throw DataError("initial_distribution requires |phi| < 1");
    const double stat_sd = theta.sigma_s / std::sqrt(1.0 - theta.phi * theta.phi);
    Eigen::VectorXd delta(grid.m);
    for (int i = 0; i < grid.m; ++i)
        delta[i] = grid.h * norm_pdf(grid.midpoints[i], 0.0, stat_sd);
    const double total = delta.sum();
    if (!(total > 0.0))
        throw DataError("initial distribution vanishes on the grid; widen grid.bound");
    return delta / total;
}

TransitionKernel::TransitionKernel(const StateGrid& grid, const ParameterSet& theta)
    : grid_(grid), phi_(theta.phi), inv_var_(1.0 / (theta.sigma_s * theta.sigma_s)) {
    const TransitionMatrix tm = transition_matrix(grid, 0.0, theta);
    g0t_ = tm.gamma.transpose();
    // Largest exponent the split factors can see: |d| (1 + |phi|) B / sigma_s^2.
    exponent_cap_ = 600.0;
}

void TransitionKernel::apply_transposed(double shift, const Eigen::VectorXd& a,
                                        Eigen::VectorXd& w,
                                        TransitionScratch& scratch) const {
    const int m = grid_.m;
    if (shift == 0.0) {
        w.noalias() = g0t_ * a;
        return;
    }
    const double worst =
        std::abs(shift) * (1.0 + std::abs(phi_)) * grid_.bound * inv_var_;
    if (worst < exponent_cap_) {
        const double c = std::exp(-0.5 * shift * shift * inv_var_);
        scratch.weighted = (-(shift * phi_ * inv_var_) * grid_.midpoints.array()).exp() *
                           a.array();
        scratch.mixed.noalias() = g0t_ * scratch.weighted;
        w = (shift * inv_var_ * grid_.midpoints.array()).exp() * scratch.mixed.array() * c;
        return;
    }
    // Extreme shift or tiny sigma_s: evaluate the full exponent per entry,
    // which never overflows because it is <= 0.
    scratch.dense.resize(m, m);
    const double scale = grid_.h * std::sqrt(inv_var_) / kSqrt2Pi;
    for (int i = 0; i < m; ++i) {
        const double center = phi_ * grid_.midpoints[i] + shift;
        scratch.dense.col(i) =
            (-(grid_.midpoints.array() - center).square() * (0.5 * inv_var_)).exp() * scale;
    }
    w.noalias() = scratch.dense * a;
}

} // namespace stakewatch
