#include "stakewatch/emission.hpp"

#include <cmath>

#include "stakewatch/errors.hpp"
#include "stakewatch/mathutil.hpp"

namespace stakewatch {

double zero_prob(const CovariateRow& row, const ParameterSet& theta, bool open,
                 const ModelSpec& spec) {
    if (!open) return 1.0;
    if (spec.uses_pi_const()) return theta.pi_const;
    theta.check_arity(spec);
    const double g = row.gini;
    const double m = row.minute_std;
    const double eta = theta.alpha[0] + theta.alpha[1] * g + theta.alpha[2] * g * g +
                       theta.alpha[3] * m + theta.alpha[4] * m * g +
                       theta.alpha[5] * m * g * g;
    return logistic(eta);
}

double mean_predictor(const CovariateRow& row, const ParameterSet& theta,
                      const ModelSpec& spec) {
    theta.check_arity(spec);
    if (spec.variant == Variant::kBaseline) return theta.beta[0];
    const double m = row.minute_std;
    return theta.beta[0] + theta.beta[1] * row.stake_avg_team +
           theta.beta[2] * row.improb_start + theta.beta[3] * row.redcard_team +
           theta.beta[4] * row.redcard_opponent + theta.beta[5] * row.scorediff +
           theta.beta[6] * m + theta.beta[7] * m * m + theta.beta[8] * row.halftime;
}

double state_shift(const CovariateRow& row, const ParameterSet& theta,
                   const ModelSpec& spec) {
    if (!spec.has_state_covariates()) return 0.0;
    return theta.omega[0] * row.decay_surprising + theta.omega[1] * row.decay_slightly +
           theta.omega[2] * row.decay_unsurprising + theta.omega[3] * row.xg_diff +
           theta.omega[4] * row.halftime;
}

double emission_density(double y, double s, const CovariateRow& row, bool open,
                        const ParameterSet& theta, const ModelSpec& spec) {
    if (y < 0.0) throw DataError("negative stake");
    const double pi = zero_prob(row, theta, open, spec);
    if (y == 0.0) return pi;
    if (!open) throw DataError("positive stake on a closed market violates pi_t = 1");
    const double nu = mean_predictor(row, theta, spec);
    return (1.0 - pi) * norm_pdf(std::log(y), nu + s, theta.sigma);
}

PredictorPaths compute_predictors(const TeamMatchSeries& series, const ParameterSet& theta,
                                  const ModelSpec& spec) {
    theta.check_arity(spec);
    if (spec.variant != Variant::kBaseline && !series.stake_avg_set)
        throw DataError("series " + series.match_id + "/" + series.team_id +
                        ": stake_avg_team not attached (corpus not prepared)");
    PredictorPaths p;
    p.nu.resize(series.T);
    p.pi.resize(series.T);
    p.shift.resize(series.T);
    for (int t = 0; t < series.T; ++t) {
        const CovariateRow row = series.covariate_row(t, spec);
        const bool open = series.open[t] != 0;
        p.nu[t] = mean_predictor(row, theta, spec);
        p.pi[t] = zero_prob(row, theta, open, spec);
        p.shift[t] = state_shift(row, theta, spec);
    }
    return p;
}

} // namespace stakewatch
