// Compares the OpenMP corpus kernels against their serial references:
// simulation, total log-likelihood and PIT scoring. The parallel paths must
// reproduce the serial results exactly.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>

#include "stakewatch/fit.hpp"
#include "stakewatch/likelihood.hpp"
#include "stakewatch/scoring.hpp"
#include "stakewatch/simulator.hpp"

using namespace stakewatch;

namespace {

double seconds(const std::chrono::steady_clock::time_point& a,
               const std::chrono::steady_clock::time_point& b) {
    return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return seconds(t0, t1);
}

} // namespace

int main(int argc, char** argv) {
    int matches = 300;
    if (argc > 1) matches = std::atoi(argv[1]);
    std::printf("threads: %d, matches: %d\n", omp_get_max_threads(), matches);

    SimConfig config = sim_config_defaults(Variant::kBaseline);
    config.matches = matches;
    config.seed = 99;

    SimOutput out_serial, out_parallel;
    const double t_sim_serial = timed([&] { out_serial = simulate_corpus_serial(config); });
    const double t_sim_parallel = timed([&] { out_parallel = simulate_corpus(config); });

    bool sim_equal = out_serial.matches.size() == out_parallel.matches.size();
    for (std::size_t i = 0; sim_equal && i < out_serial.matches.size(); ++i) {
        const auto& a = out_serial.matches[i].record;
        const auto& b = out_parallel.matches[i].record;
        sim_equal = a.match_id == b.match_id && a.stake_home == b.stake_home &&
                    a.stake_away == b.stake_away && a.open == b.open;
    }
    std::printf("simulate   serial %7.3fs  parallel %7.3fs  speedup %4.2fx  equal: %s\n",
                t_sim_serial, t_sim_parallel, t_sim_serial / t_sim_parallel,
                sim_equal ? "yes" : "NO");

    ModelSpec spec;
    spec.variant = Variant::kBaseline;
    std::vector<MatchRecord> records;
    for (const auto& sm : out_serial.matches) records.push_back(sm.record);
    Corpus corpus = corpus_from_records(records, spec);
    prepare_for_fit(corpus, spec);
    const StateGrid grid = build_grid(spec);
    const ParameterSet theta = reference_baseline_parameters();

    double ll_serial = 0.0, ll_parallel = 0.0;
    const double t_ll_serial =
        timed([&] { ll_serial = total_loglik_serial(corpus, theta, spec, grid); });
    const double t_ll_parallel =
        timed([&] { ll_parallel = total_loglik(corpus, theta, spec, grid); });
    std::printf("loglik     serial %7.3fs  parallel %7.3fs  speedup %4.2fx  equal: %s "
                "(%.6f)\n",
                t_ll_serial, t_ll_parallel, t_ll_serial / t_ll_parallel,
                ll_serial == ll_parallel ? "yes" : "NO", ll_serial);

    Model model;
    model.spec = spec;
    model.theta = theta;
    model.team_avg = corpus.team_avg;
    ScorePolicy policy;
    policy.seed = 5;

    std::vector<SeriesScores> sc_serial, sc_parallel;
    const double t_sc_serial =
        timed([&] { sc_serial = score_corpus_serial(corpus, model, policy); });
    const double t_sc_parallel = timed([&] { sc_parallel = score_corpus(corpus, model, policy); });
    bool sc_equal = sc_serial.size() == sc_parallel.size();
    for (std::size_t i = 0; sc_equal && i < sc_serial.size(); ++i) {
        for (std::size_t t = 0; sc_equal && t < sc_serial[i].minutes.size(); ++t)
            sc_equal = sc_serial[i].minutes[t].pit == sc_parallel[i].minutes[t].pit;
    }
    std::printf("score      serial %7.3fs  parallel %7.3fs  speedup %4.2fx  equal: %s\n",
                t_sc_serial, t_sc_parallel, t_sc_serial / t_sc_parallel,
                sc_equal ? "yes" : "NO");

    return (sim_equal && ll_serial == ll_parallel && sc_equal) ? 0 : 1;
}
