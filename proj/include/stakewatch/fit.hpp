#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stakewatch/likelihood.hpp"
#include "stakewatch/match_data.hpp"
#include "stakewatch/model_spec.hpp"

namespace stakewatch {

struct ParamEstimate {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;        // natural scale, delta method through the transform
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool se_valid = false;  // false when the Hessian was not positive definite
};

struct FitDiagnostics {
    int iterations = 0;
    int function_evals = 0;
    bool converged = false;
    std::string stop_reason;
    double grad_max = 0.0;
    double max_truncation = 0.0;  // worst row of Gamma(0) at the estimate
    double stationary_truncation = 0.0;  // delta-weighted truncated mass per step
    bool hessian_pd = true;
    bool grid_resolution_ok = true;  // sigma_s_hat >= grid step
};

struct FitResult {
    ModelSpec spec;  // grid settings and frozen minute constants included
    ParameterSet theta;
    double loglik = 0.0;
    double aic = 0.0;
    int k = 0;
    std::vector<ParamEstimate> table;
    FitDiagnostics diag;
    std::uint64_t corpus_digest = 0;
    std::map<std::string, double> team_avg;
};

struct FitOptions {
    int max_iter = 500;
    bool compute_ci = true;
    bool multistart = false;  // 5 jittered starts when enabled
    int starts = 5;
    std::uint64_t multistart_seed = 7;
    bool verbose = false;
    std::optional<ParameterSet> init;
};

// phi = 0.9, sigma_s = 0.3, sigma and beta0 from the observed log positive
// stakes, pi from the empirical zero frequency on open minutes, rest 0.
ParameterSet default_init(const Corpus& corpus, const ModelSpec& spec);

// Maximizes the corpus likelihood over the unconstrained reparameterization.
// Freezes fit-time constants into the returned spec; a non-converged run is
// returned flagged, never silently as converged.
FitResult fit(Corpus& corpus, ModelSpec spec, const FitOptions& options = {});

double aic_value(int k, double loglik);

// -1 if a is preferred (lower AIC), +1 if b, 0 on ties. Rejects results
// fitted on different corpora or with different density conventions.
int compare_aic(const FitResult& a, const FitResult& b);

// Hurdle model without a latent state (constant mean level); closed-form
// MLE. Serves as the AIC benchmark.
struct NoStateFit {
    double pi = 0.0, mu = 0.0, sigma = 0.0;
    double loglik = 0.0;
    int k = 3;
    double aic = 0.0;
    std::uint64_t corpus_digest = 0;
};
NoStateFit fit_nostate_hurdle(const Corpus& corpus);

// Fit artifacts on disk: params.csv, teams.csv, model.kv, report.txt.
void write_fit_outputs(const FitResult& result, const std::string& out_dir);

struct Model {
    ModelSpec spec;
    ParameterSet theta;
    std::map<std::string, double> team_avg;
    double loglik = 0.0;
    double aic = 0.0;
    bool converged = false;
};
Model load_model(const std::string& dir);

} // namespace stakewatch
