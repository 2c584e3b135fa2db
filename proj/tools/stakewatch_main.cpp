// Command-line front end: simulate | fit | score | eval.

#include <omp.h>

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stakewatch/errors.hpp"
#include "stakewatch/runner.hpp"

using namespace stakewatch;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string model;
    int grid_m = 0;
    double grid_bound = 0.0;
    double threshold = 0.0;
    bool threshold_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
    cmd->add_option("--out", flags.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", flags.seed, "random seed override")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--threads", flags.threads, "worker threads (default: machine parallelism)");
    cmd->add_option("--model", flags.model, "model variant: baseline|state-dep|full");
    cmd->add_option("--grid-m", flags.grid_m, "state grid intervals");
    cmd->add_option("--grid-bound", flags.grid_bound, "state grid half-width");
    cmd->add_option("--threshold", flags.threshold, "one-sided PIT flag threshold")
        ->each([&flags](const std::string&) { flags.threshold_set = true; });
}

RunConfig build_run_config(const CommonFlags& flags) {
    RunConfig rc;
    rc.config_path = flags.config_path;
    rc.out_dir = flags.out_dir;
    rc.threads = flags.threads;
    if (!flags.config_path.empty()) rc.kv = KvMap::from_file(flags.config_path);
    if (flags.seed_set) {
        rc.seed = flags.seed;
        rc.kv.set("seed", static_cast<long long>(flags.seed));
    }
    if (!flags.model.empty()) rc.kv.set("model", flags.model);
    if (flags.grid_m > 0) rc.kv.set("grid.m", static_cast<long long>(flags.grid_m));
    if (flags.grid_bound > 0.0) rc.kv.set("grid.bound", flags.grid_bound);
    if (flags.threshold_set) rc.kv.set("threshold", flags.threshold);
    if (flags.threads > 0) omp_set_num_threads(flags.threads);
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hurdle state-space modelling of in-play betting stakes"};
    app.require_subcommand(1);

    CommonFlags sim_flags, fit_flags, score_flags, eval_flags;
    CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic corpus + truth sidecar");
    add_common(sim, sim_flags);
    CLI::App* fit = app.add_subcommand("fit", "fit a model variant to a corpus CSV");
    add_common(fit, fit_flags);
    CLI::App* score = app.add_subcommand("score", "one-step-ahead PIT scoring of a corpus");
    add_common(score, score_flags);
    CLI::App* eval = app.add_subcommand("eval", "detection metrics against a truth sidecar");
    add_common(eval, eval_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(build_run_config(sim_flags));
        if (fit->parsed()) return cmd_fit(build_run_config(fit_flags));
        if (score->parsed()) return cmd_score(build_run_config(score_flags));
        if (eval->parsed()) return cmd_eval(build_run_config(eval_flags));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
