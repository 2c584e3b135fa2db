#include "stakewatch/likelihood.hpp"

#include <cmath>
#include <string>

#include "stakewatch/errors.hpp"
#include "stakewatch/mathutil.hpp"

namespace stakewatch {

namespace {

[[noreturn]] void emission_failure(const TeamMatchSeries& series, int t) {
    throw DataError("series " + series.match_id + "/" + series.team_id +
                    ": non-finite emission at minute " + std::to_string(t + 1));
}

} // namespace

double forward_loglik(const TeamMatchSeries& series, const PredictorPaths& paths,
                      const ParameterSet& theta, const TransitionKernel& kernel,
                      const Eigen::VectorXd& delta, ForwardScratch& scratch) {
    const StateGrid& grid = kernel.grid();
    const int m = grid.m;
    const double log_norm = -std::log(theta.sigma) - kLogSqrt2Pi;
    const double inv_sigma = 1.0 / theta.sigma;

    double loglik = 0.0;
    scratch.alpha = delta;
    for (int t = 0; t < series.T; ++t) {
        const Eigen::VectorXd* w = &scratch.alpha;
        if (t > 0) {
            kernel.apply_transposed(paths.shift[t], scratch.alpha, scratch.propagated,
                                    scratch.transition);
            w = &scratch.propagated;
        }

        const double y = series.y[t];
        double c;
        if (y == 0.0) {
            // Point mass: the emission is the same in every state, so it
            // factors out of the mixture (pi_t = 1 when the market is closed).
            const double mass = w->sum();
            c = paths.pi[t] * mass;
            if (!(c > 0.0) || !std::isfinite(c)) emission_failure(series, t);
            scratch.alpha = *w / mass;
            loglik += std::log(c);
        } else {
            if (!series.open[t])
                throw DataError("series " + series.match_id + "/" + series.team_id +
                                ": positive stake on closed market at minute " +
                                std::to_string(t + 1));
            const double ly = std::log(y);
            // Log emissions, shifted by their maximum before exponentiating so
            // extreme observations cannot underflow the whole minute.
            scratch.logem =
                -0.5 * ((grid.midpoints.array() - (ly - paths.nu[t])) * inv_sigma).square();
            const double shift_max = scratch.logem.maxCoeff();
            const double log_scale =
                std::log1p(-paths.pi[t]) + log_norm + shift_max;
            scratch.alpha = w->array() * (scratch.logem.array() - shift_max).exp();
            const double mass = scratch.alpha.sum();
            if (!(mass > 0.0) || !std::isfinite(mass) || !std::isfinite(log_scale))
                emission_failure(series, t);
            scratch.alpha /= mass;
            loglik += std::log(mass) + log_scale;
        }
        (void)m;
    }
    return loglik;
}

double forward_loglik(const TeamMatchSeries& series, const ParameterSet& theta,
                      const ModelSpec& spec, const StateGrid& grid) {
    const TransitionKernel kernel(grid, theta);
    const Eigen::VectorXd delta = initial_distribution(grid, theta);
    const PredictorPaths paths = compute_predictors(series, theta, spec);
    ForwardScratch scratch;
    return forward_loglik(series, paths, theta, kernel, delta, scratch);
}

namespace {

double corpus_loglik(const Corpus& corpus, const ParameterSet& theta, const ModelSpec& spec,
                     const StateGrid& grid, bool parallel) {
    if (corpus.series.empty()) throw DataError("empty corpus");
    theta.check_arity(spec);
    const TransitionKernel kernel(grid, theta);
    const Eigen::VectorXd delta = initial_distribution(grid, theta);

    const int n = static_cast<int>(corpus.series.size());
    std::vector<double> per_series(n, 0.0);
    std::string first_error;

#pragma omp parallel if (parallel)
    {
        ForwardScratch scratch;
#pragma omp for schedule(dynamic, 4)
        for (int i = 0; i < n; ++i) {
            try {
                const PredictorPaths paths =
                    compute_predictors(corpus.series[i], theta, spec);
                per_series[i] =
                    forward_loglik(corpus.series[i], paths, theta, kernel, delta, scratch);
            } catch (const std::exception& e) {
#pragma omp critical
                if (first_error.empty()) first_error = e.what();
            }
        }
    }
    if (!first_error.empty()) throw DataError(first_error);

    // Fixed-order reduction: the total is independent of thread scheduling.
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += per_series[i];
    return total;
}

} // namespace

double total_loglik(const Corpus& corpus, const ParameterSet& theta, const ModelSpec& spec,
                    const StateGrid& grid) {
    return corpus_loglik(corpus, theta, spec, grid, true);
}

double total_loglik_serial(const Corpus& corpus, const ParameterSet& theta,
                           const ModelSpec& spec, const StateGrid& grid) {
    return corpus_loglik(corpus, theta, spec, grid, false);
}

} // namespace stakewatch
