// Independent test oracles. These deliberately avoid the library's forward
// recursion, transition kernel and scoring filter: plain loops and direct
// density evaluations only, so they can confirm those code paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "stakewatch/emission.hpp"
#include "stakewatch/match_data.hpp"
#include "stakewatch/mathutil.hpp"
#include "stakewatch/state_grid.hpp"

namespace oracles {

using stakewatch::CovariateRow;
using stakewatch::ModelSpec;
using stakewatch::ParameterSet;
using stakewatch::StateGrid;
using stakewatch::TeamMatchSeries;

struct PathProblem {
    std::vector<double> y;
    std::vector<bool> open;
    std::vector<double> nu;
    std::vector<double> pi;
    std::vector<double> shift;
};

inline PathProblem make_problem(const TeamMatchSeries& s, const ParameterSet& theta,
                                const ModelSpec& spec) {
    PathProblem p;
    for (int t = 0; t < s.T; ++t) {
        const CovariateRow row = s.covariate_row(t, spec);
        const bool open = s.open[t] != 0;
        p.y.push_back(s.y[t]);
        p.open.push_back(open);
        p.nu.push_back(stakewatch::mean_predictor(row, theta, spec));
        p.pi.push_back(stakewatch::zero_prob(row, theta, open, spec));
        p.shift.push_back(stakewatch::state_shift(row, theta, spec));
    }
    return p;
}

inline double emission_at(const PathProblem& p, const ParameterSet& theta, int t, double state) {
    if (p.y[t] == 0.0) return p.pi[t];
    return (1.0 - p.pi[t]) *
           stakewatch::norm_pdf(std::log(p.y[t]), p.nu[t] + state, theta.sigma);
}

// Brute-force sum over all m^T state paths of the discretized likelihood
// summand. Grid weights and transition densities are recomputed from
// scratch. Only feasible for tiny m and T.
inline double exhaustive_path_loglik(const PathProblem& p, const ParameterSet& theta,
                                     const StateGrid& grid) {
    const int T = static_cast<int>(p.y.size());
    const int m = grid.m;
    std::vector<double> delta(static_cast<std::size_t>(m));
    const double stat_sd = theta.sigma_s / std::sqrt(1.0 - theta.phi * theta.phi);
    double total_delta = 0.0;
    for (int i = 0; i < m; ++i) {
        delta[i] = grid.h * stakewatch::norm_pdf(grid.midpoints[i], 0.0, stat_sd);
        total_delta += delta[i];
    }
    for (int i = 0; i < m; ++i) delta[i] /= total_delta;

    std::vector<int> idx(static_cast<std::size_t>(T), 0);
    double sum = 0.0;
    while (true) {
        double term = delta[idx[0]] * emission_at(p, theta, 0, grid.midpoints[idx[0]]);
        for (int t = 1; t < T && term != 0.0; ++t) {
            const double center = theta.phi * grid.midpoints[idx[t - 1]] + p.shift[t];
            term *= grid.h * stakewatch::norm_pdf(grid.midpoints[idx[t]], center, theta.sigma_s) *
                    emission_at(p, theta, t, grid.midpoints[idx[t]]);
        }
        sum += term;
        int pos = T - 1;
        while (pos >= 0 && ++idx[pos] == m) idx[pos--] = 0;
        if (pos < 0) break;
    }
    return std::log(sum);
}

// Exact interval mass of the transition density: the CDF-difference oracle
// for gamma_ij.
inline double cdf_transition_mass(const StateGrid& grid, const ParameterSet& theta,
                                  double shift, int i, int j) {
    const double center = theta.phi * grid.midpoints[i] + shift;
    return stakewatch::norm_cdf(grid.boundaries[j + 1], center, theta.sigma_s) -
           stakewatch::norm_cdf(grid.boundaries[j], center, theta.sigma_s);
}

// Pairwise-difference Gini on raw values (no bias correction), for the
// mean-preserving-spread property checks.
inline double plain_gini(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    double mean = 0.0, sumabs = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sumabs += std::abs(v[i] - v[j]);
    return sumabs / (2.0 * n * n * mean);
}

// Kolmogorov-Smirnov distance to U(0,1) plus Stephens' 5% critical value.
inline double ks_statistic(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const int n = static_cast<int>(u.size());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        d = std::max(d, std::abs((i + 1.0) / n - u[i]));
        d = std::max(d, std::abs(u[i] - static_cast<double>(i) / n));
    }
    return d;
}

inline bool ks_pass_5pct(const std::vector<double>& u) {
    const double n = static_cast<double>(u.size());
    const double crit = 1.358 / (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    return ks_statistic(u) < crit;
}

// Anderson-Darling statistic against a fully specified normal; 5% critical
// value for the no-estimated-parameters case is 2.492.
inline double ad_statistic_normal(std::vector<double> x, double mean, double sd) {
    std::sort(x.begin(), x.end());
    const int n = static_cast<int>(x.size());
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double zi = stakewatch::norm_cdf((x[i] - mean) / sd);
        const double zr = stakewatch::norm_cdf((x[n - 1 - i] - mean) / sd);
        const double lo = std::max(1e-300, zi);
        const double hi = std::max(1e-300, 1.0 - zr);
        acc += (2.0 * i + 1.0) * (std::log(lo) + std::log(hi));
    }
    return -n - acc / n;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline double lag1_autocorr(const std::vector<double>& v) {
    const double m = mean_of(v);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t + 1 < v.size(); ++t)
        num += (v[t] - m) * (v[t + 1] - m);
    for (double x : v) den += (x - m) * (x - m);
    return num / den;
}

// Composite Simpson rule on [a, b].
template <typename F>
double simpson(F&& f, double a, double b, int intervals) {
    if (intervals % 2) ++intervals;
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace oracles
