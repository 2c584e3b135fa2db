#pragma once

#include <Eigen/Dense>

#include "stakewatch/match_data.hpp"
#include "stakewatch/model_spec.hpp"

namespace stakewatch {

// Probability that no stakes are placed in the minute. Exactly 1 when the
// market is closed; a constant for the baseline variant; otherwise a
// logistic regression on gini, gini^2, minute, minute*gini, minute*gini^2.
double zero_prob(const CovariateRow& row, const ParameterSet& theta, bool open,
                 const ModelSpec& spec);

// Linear predictor nu_t for the mean of log stakes.
double mean_predictor(const CovariateRow& row, const ParameterSet& theta,
                      const ModelSpec& spec);

// Covariate shift d_t entering the state recursion (0 unless the full variant).
double state_shift(const CovariateRow& row, const ParameterSet& theta,
                   const ModelSpec& spec);

// Hurdle emission density at state value s. The positive branch is the
// normal density of log(y); this log-scale convention is fixed everywhere so
// likelihoods, AIC deltas and PIT values stay mutually consistent.
double emission_density(double y, double s, const CovariateRow& row, bool open,
                        const ParameterSet& theta, const ModelSpec& spec);

// Per-minute predictor paths of one series under theta, precomputed once so
// the forward recursion never touches covariates.
struct PredictorPaths {
    Eigen::VectorXd nu;      // mean predictor
    Eigen::VectorXd pi;      // zero probability (1 where closed)
    Eigen::VectorXd shift;   // state covariate shift d_t
};

PredictorPaths compute_predictors(const TeamMatchSeries& series, const ParameterSet& theta,
                                  const ModelSpec& spec);

} // namespace stakewatch
