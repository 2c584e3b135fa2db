#pragma once

#include <Eigen/Dense>

#include "stakewatch/emission.hpp"
#include "stakewatch/match_data.hpp"
#include "stakewatch/state_grid.hpp"

namespace stakewatch {

// Scratch space for one forward pass; reused across series by one thread.
struct ForwardScratch {
    Eigen::VectorXd alpha;
    Eigen::VectorXd propagated;
    Eigen::VectorXd logem;
    TransitionScratch transition;
};

// Log-likelihood of one series via the scaled forward recursion over the
// discretized state space: log of delta P(y_1) Gamma_2 P(y_2) ... P(y_T) 1,
// O(T m^2), finite for arbitrarily long series. Throws DataError (with the
// minute index) if an emission is non-finite.
double forward_loglik(const TeamMatchSeries& series, const ParameterSet& theta,
                      const ModelSpec& spec, const StateGrid& grid);

// Core used by both the likelihood and the scoring filter.
double forward_loglik(const TeamMatchSeries& series, const PredictorPaths& paths,
                      const ParameterSet& theta, const TransitionKernel& kernel,
                      const Eigen::VectorXd& delta, ForwardScratch& scratch);

// Corpus log-likelihood: sum over series, independence across matches and
// teams. The OpenMP version evaluates series in parallel and reduces in
// series order, so the result is identical to the serial reference.
double total_loglik(const Corpus& corpus, const ParameterSet& theta, const ModelSpec& spec,
                    const StateGrid& grid);
double total_loglik_serial(const Corpus& corpus, const ParameterSet& theta,
                           const ModelSpec& spec, const StateGrid& grid);

} // namespace stakewatch
