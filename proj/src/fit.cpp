#include "stakewatch/fit.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "stakewatch/csv.hpp"
#include "stakewatch/errors.hpp"
#include "stakewatch/kvconfig.hpp"
#include "stakewatch/mathutil.hpp"
#include "stakewatch/optimizer.hpp"
#include "stakewatch/rng.hpp"
#include "stakewatch/state_grid.hpp"

namespace stakewatch {

ParameterSet default_init(const Corpus& corpus, const ModelSpec& spec) {
    double sum = 0.0, sumsq = 0.0;
    long long n_pos = 0, n_open = 0, n_zero = 0;
    for (const auto& s : corpus.series) {
        for (int t = 0; t < s.T; ++t) {
            if (!s.open[t]) continue;
            ++n_open;
            if (s.y[t] > 0.0) {
                const double ly = std::log(s.y[t]);
                sum += ly;
                sumsq += ly * ly;
                ++n_pos;
            } else {
                ++n_zero;
            }
        }
    }
    if (n_pos < 2) throw DataError("corpus has fewer than two positive stakes");
    const double mean = sum / static_cast<double>(n_pos);
    const double var = std::max(1e-8, sumsq / static_cast<double>(n_pos) - mean * mean);

    ParameterSet init = ParameterSet::zeros(spec);
    init.phi = 0.9;
    init.sigma_s = 0.3;
    init.sigma = std::sqrt(var);
    init.beta[0] = mean;
    const double zero_freq = static_cast<double>(n_zero) / static_cast<double>(n_open);
    init.pi_const = std::min(0.99, std::max(0.01, zero_freq));
    return init;
}

namespace {

struct HessianCi {
    bool pd = false;
    Eigen::VectorXd se_unconstrained;
};

HessianCi observed_information_se(const Objective& f, const Eigen::VectorXd& u, double f0) {
    const int k = static_cast<int>(u.size());
    Eigen::MatrixXd H(k, k);
    Eigen::VectorXd h(k);
    for (int i = 0; i < k; ++i) h[i] = 1e-4 * std::max(1.0, std::abs(u[i]));

    Eigen::VectorXd x = u;
    for (int i = 0; i < k; ++i) {
        x[i] = u[i] + h[i];
        const double fp = f(x);
        x[i] = u[i] - h[i];
        const double fm = f(x);
        x[i] = u[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    }
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            x[i] = u[i] + h[i]; x[j] = u[j] + h[j];
            const double fpp = f(x);
            x[j] = u[j] - h[j];
            const double fpm = f(x);
            x[i] = u[i] - h[i]; x[j] = u[j] + h[j];
            const double fmp = f(x);
            x[j] = u[j] - h[j];
            const double fmm = f(x);
            x[i] = u[i]; x[j] = u[j];
            H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
        }
    }

    HessianCi out;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) return out;
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
    out.se_unconstrained.resize(k);
    for (int i = 0; i < k; ++i) {
        if (!(cov(i, i) > 0.0)) return out;
        out.se_unconstrained[i] = std::sqrt(cov(i, i));
    }
    out.pd = true;
    return out;
}

} // namespace

FitResult fit(Corpus& corpus, ModelSpec spec, const FitOptions& options) {
    if (corpus.series.empty()) throw DataError("empty corpus");
    prepare_for_fit(corpus, spec);
    const StateGrid grid = build_grid(spec);

    ParameterSet theta0 = options.init ? *options.init : default_init(corpus, spec);
    theta0.check_arity(spec);

    // Surface genuine data problems before the optimizer can mask them.
    (void)total_loglik(corpus, theta0, spec, grid);

    const Objective objective = [&](const Eigen::VectorXd& u) -> double {
        try {
            return -total_loglik(corpus, from_unconstrained(u, spec), spec, grid);
        } catch (const DataError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    BfgsOptions bopt;
    bopt.max_iter = options.max_iter;
    if (options.verbose) {
        bopt.on_iteration = [](int iter, double f, double g) {
            std::fprintf(stderr, "  iter %3d  negloglik %.6f  grad %.3g\n", iter, f, g);
        };
    }

    BfgsResult best = bfgs_minimize(objective, to_unconstrained(theta0, spec), bopt);
    if (options.multistart) {
        Rng rng = Rng::stream(options.multistart_seed, "multistart");
        for (int s = 1; s < options.starts; ++s) {
            Eigen::VectorXd u = to_unconstrained(theta0, spec);
            for (int i = 0; i < u.size(); ++i) u[i] += rng.normal(0.0, 0.25);
            const BfgsResult round = bfgs_minimize(objective, u, bopt);
            if (round.f < best.f) best = round;
        }
    }

    FitResult result;
    result.spec = spec;
    result.theta = from_unconstrained(best.x, spec);
    result.loglik = -best.f;
    result.k = spec.free_param_count();
    result.aic = aic_value(result.k, result.loglik);
    result.corpus_digest = corpus_digest(corpus);
    result.team_avg = corpus.team_avg;
    result.diag.iterations = best.iterations;
    result.diag.function_evals = best.function_evals;
    result.diag.converged = best.converged;
    result.diag.stop_reason = best.stop_reason;
    result.diag.grad_max = best.gradient.size() ? best.gradient.cwiseAbs().maxCoeff() : 0.0;

    const TransitionMatrix tm0 = transition_matrix(grid, 0.0, result.theta);
    result.diag.max_truncation = tm0.max_truncation;
    {
        const Eigen::VectorXd delta = initial_distribution(grid, result.theta);
        const Eigen::VectorXd row_loss =
            Eigen::VectorXd::Ones(grid.m) - tm0.gamma.rowwise().sum();
        result.diag.stationary_truncation = std::max(0.0, delta.dot(row_loss));
    }
    result.diag.grid_resolution_ok = result.theta.sigma_s >= grid.h;
    if (!result.diag.grid_resolution_ok)
        std::fprintf(stderr,
                     "warning: fitted sigma_s %.4g is below the grid step %.4g; "
                     "increase grid.m\n",
                     result.theta.sigma_s, grid.h);

    const auto names = parameter_names(spec);
    const Eigen::VectorXd values = natural_values(result.theta, spec);
    result.table.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        result.table[i].name = names[i];
        result.table[i].estimate = values[static_cast<int>(i)];
    }

    if (options.compute_ci) {
        const HessianCi ci = observed_information_se(objective, best.x, best.f);
        result.diag.hessian_pd = ci.pd;
        if (ci.pd) {
            const Eigen::VectorXd jac = transform_jacobian_diag(result.theta, spec);
            for (std::size_t i = 0; i < names.size(); ++i) {
                const int ii = static_cast<int>(i);
                const double se = ci.se_unconstrained[ii] * std::abs(jac[ii]);
                result.table[i].se = se;
                result.table[i].ci_lo = values[ii] - 1.96 * se;
                result.table[i].ci_hi = values[ii] + 1.96 * se;
                result.table[i].se_valid = true;
            }
        } else {
            std::fprintf(stderr,
                         "warning: observed information matrix is not positive definite; "
                         "confidence intervals omitted\n");
        }
    }
    return result;
}

double aic_value(int k, double loglik) { return 2.0 * k - 2.0 * loglik; }

int compare_aic(const FitResult& a, const FitResult& b) {
    if (a.corpus_digest != b.corpus_digest)
        throw DataError("compare_aic: fits come from different corpora");
    if (a.aic < b.aic) return -1;
    if (b.aic < a.aic) return 1;
    return 0;
}

NoStateFit fit_nostate_hurdle(const Corpus& corpus) {
    if (corpus.series.empty()) throw DataError("empty corpus");
    double sum = 0.0, sumsq = 0.0;
    long long n_pos = 0, n_open = 0;
    for (const auto& s : corpus.series) {
        for (int t = 0; t < s.T; ++t) {
            if (!s.open[t]) continue;
            ++n_open;
            if (s.y[t] > 0.0) {
                const double ly = std::log(s.y[t]);
                sum += ly;
                sumsq += ly * ly;
                ++n_pos;
            }
        }
    }
    if (n_pos < 2) throw DataError("corpus has fewer than two positive stakes");
    NoStateFit f;
    f.mu = sum / static_cast<double>(n_pos);
    f.sigma = std::sqrt(std::max(1e-12, sumsq / static_cast<double>(n_pos) - f.mu * f.mu));
    f.pi = static_cast<double>(n_open - n_pos) / static_cast<double>(n_open);
    double ll = 0.0;
    for (const auto& s : corpus.series) {
        for (int t = 0; t < s.T; ++t) {
            if (!s.open[t]) continue;  // pi_t = 1 contributes log 1 = 0
            if (s.y[t] > 0.0)
                ll += std::log1p(-f.pi) + norm_logpdf(std::log(s.y[t]), f.mu, f.sigma);
            else
                ll += std::log(f.pi);
        }
    }
    f.loglik = ll;
    f.aic = aic_value(f.k, f.loglik);
    f.corpus_digest = corpus_digest(corpus);
    return f;
}

void write_fit_outputs(const FitResult& result, const std::string& out_dir) {
    {
        CsvWriter w(out_dir + "/params.csv", {"parameter", "estimate", "se", "ci_lo", "ci_hi"});
        for (const auto& row : result.table) {
            w.field(row.name).field(row.estimate);
            if (row.se_valid)
                w.field(row.se).field(row.ci_lo).field(row.ci_hi);
            else
                w.field(std::string()).field(std::string()).field(std::string());
            w.end_row();
        }
        w.close();
    }
    {
        CsvWriter w(out_dir + "/teams.csv", {"team_id", "stake_avg_team"});
        for (const auto& [team, avg] : result.team_avg) {
            w.field(team).field(avg);
            w.end_row();
        }
        w.close();
    }
    {
        KvMap kv;
        kv.set("variant", variant_to_string(result.spec.variant));
        kv.set("grid.m", static_cast<long long>(result.spec.grid_m));
        kv.set("grid.bound", result.spec.grid_bound);
        kv.set("minute.mean", result.spec.minute_mean);
        kv.set("minute.sd", result.spec.minute_sd);
        kv.set("loglik", result.loglik);
        kv.set("aic", result.aic);
        kv.set("k", static_cast<long long>(result.k));
        kv.set("converged", std::string(result.diag.converged ? "true" : "false"));
        kv.set("iterations", static_cast<long long>(result.diag.iterations));
        kv.set("function_evals", static_cast<long long>(result.diag.function_evals));
        kv.set("stop_reason", result.diag.stop_reason);
        kv.set("grad_max", result.diag.grad_max);
        kv.set("max_truncation", result.diag.max_truncation);
        kv.set("stationary_truncation", result.diag.stationary_truncation);
        kv.set("hessian_pd", std::string(result.diag.hessian_pd ? "true" : "false"));
        kv.set("corpus_digest", static_cast<long long>(result.corpus_digest));
        kv.write_file(out_dir + "/model.kv");
    }
    {
        std::ofstream out(out_dir + "/report.txt");
        if (!out) throw IoError("cannot open for writing: " + out_dir + "/report.txt");
        out << "model: " << variant_to_string(result.spec.variant)
            << "   log-likelihood: " << format_double(result.loglik)
            << "   AIC: " << format_double(result.aic) << "   k: " << result.k << "\n";
        out << (result.diag.converged ? "converged" : "NOT CONVERGED") << " after "
            << result.diag.iterations << " iterations (" << result.diag.stop_reason << ")\n\n";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-10s %10s   %s\n", "parameter", "estimate",
                      "95% confidence interval");
        out << buf;
        for (const auto& row : result.table) {
            if (row.se_valid)
                std::snprintf(buf, sizeof(buf), "%-10s %10.3f   [%8.3f; %8.3f]\n",
                              row.name.c_str(), row.estimate, row.ci_lo, row.ci_hi);
            else
                std::snprintf(buf, sizeof(buf), "%-10s %10.3f   [    n/a ;     n/a ]\n",
                              row.name.c_str(), row.estimate);
            out << buf;
        }
        out.flush();
        if (!out) throw IoError("write failure: " + out_dir + "/report.txt");
    }
}

Model load_model(const std::string& dir) {
    const KvMap kv = KvMap::from_file(dir + "/model.kv");
    Model model;
    model.spec.variant = variant_from_string(kv.get_string("variant"));
    model.spec.grid_m = static_cast<int>(kv.get_int("grid.m"));
    model.spec.grid_bound = kv.get_double("grid.bound");
    model.spec.minute_mean = kv.get_double("minute.mean");
    model.spec.minute_sd = kv.get_double("minute.sd");
    model.loglik = kv.get_double("loglik");
    model.aic = kv.get_double("aic");
    model.converged = kv.get_bool("converged", false);

    model.theta = ParameterSet::zeros(model.spec);
    const auto names = parameter_names(model.spec);
    std::map<std::string, double> est;
    CsvReader params(dir + "/params.csv");
    while (params.next_row()) est[params.raw("parameter")] = params.number("estimate");
    auto need = [&](const std::string& name) {
        const auto it = est.find(name);
        if (it == est.end())
            throw DataError(dir + "/params.csv: missing parameter '" + name + "'");
        return it->second;
    };
    model.theta.phi = need("phi");
    model.theta.sigma_s = need("sigma_s");
    model.theta.sigma = need("sigma");
    if (model.spec.uses_pi_const()) model.theta.pi_const = need("pi");
    for (int i = 0; i < model.spec.beta_arity(); ++i)
        model.theta.beta[i] = need("beta" + std::to_string(i));
    for (int i = 0; i < model.spec.omega_arity(); ++i)
        model.theta.omega[i] = need("omega" + std::to_string(i + 1));
    for (int i = 0; i < model.spec.alpha_arity(); ++i)
        model.theta.alpha[i] = need("alpha" + std::to_string(i));
    (void)names;

    CsvReader teams(dir + "/teams.csv");
    while (teams.next_row())
        model.team_avg[teams.raw("team_id")] = teams.number("stake_avg_team");
    return model;
}

} // namespace stakewatch
