#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stakewatch/match_data.hpp"
#include "stakewatch/model_spec.hpp"
#include "stakewatch/rng.hpp"

namespace stakewatch {

// Synthetic corpus generator. Stakes follow the hurdle state-space model
// exactly; match events and odds paths are declared plumbing calibrated to
// plausible aggregate statistics, not a model of any real league.
struct SimConfig {
    int matches = 100;
    int minutes_per_half = 45;
    int halftime_minutes = 15;
    int teams = 20;
    std::uint64_t seed = 1;

    Variant variant = Variant::kBaseline;
    ParameterSet theta;  // defaults to the reference estimates of the variant

    double goal_rate = 2.32;     // mean total goals per match
    double redcard_rate = 0.21;  // mean total red cards per match

    int closure_event_minutes = 2;  // market closed from each goal / red card
    int closure_decided_lead = 2;   // decided-match closure near the end
    int closure_decided_from = 88;  // wall-clock minute it starts from

    double overround = 1.07;
    double sentiment_mu = 0.207;   // lognormal team sentiment (log scale)
    double sentiment_sigma = 0.55;
    double strength_sigma = 0.55;
    double home_advantage = 1.45;  // multiplies the home scoring rate

    double shot_rate = 0.11;       // per team-minute chance of an xg increment
    double shot_xg_lo = 0.03, shot_xg_hi = 0.35;
    double goal_xg_lo = 0.20, goal_xg_hi = 0.65;
    double draw_stake_scale = 0.30;

    int inject_count = 0;
    double inject_factor = 8.0;
    int inject_duration = 3;
    bool inject_pre_goal = false;

    int total_minutes() const { return 2 * minutes_per_half + halftime_minutes; }
    void validate() const;  // throws ConfigError
};

SimConfig sim_config_defaults(Variant variant);
SimConfig sim_config_from_kv(const class KvMap& kv);

// Ground truth for one team-perspective series.
struct TruthSeries {
    std::vector<double> s;        // latent path
    std::vector<double> nu;       // mean predictor
    std::vector<double> pi;       // zero probability
    std::vector<double> shift;    // state covariate shift
    std::vector<double> y_pre;    // stakes before injection
    std::vector<std::uint8_t> injected;
};

struct SimulatedMatch {
    MatchRecord record;
    TruthSeries home;
    TruthSeries away;
};

struct SimOutput {
    std::vector<SimulatedMatch> matches;
    ModelSpec spec;  // variant + generative minute standardization constants
};

SimOutput simulate_corpus(const SimConfig& config);         // matches in parallel
SimOutput simulate_corpus_serial(const SimConfig& config);  // reference

struct AnomalyInjection {
    bool target_home = true;
    int start_minute = 0;  // 1-based; 0 lets the caller pick
    int duration = 3;
    double factor = 8.0;
    bool pre_goal = false;
};

struct InjectionOutcome {
    std::vector<int> minutes;  // 1-based masked minutes
    bool shifted = false;      // window moved to the nearest open span
};

// Multiplies the target side's stakes in the window; zero minutes are
// replaced by draws from the positive branch before scaling. Throws
// DataError when the factor is not > 1 or no open window exists.
InjectionOutcome inject_anomaly(MatchRecord& record, TruthSeries& truth,
                                const AnomalyInjection& inj, const ParameterSet& theta,
                                Rng& rng);

// Latent path with the given per-minute shifts (empty means all zero);
// exposed for the simulator's distribution checks.
std::vector<double> simulate_latent_path(const ParameterSet& theta, int T,
                                         const std::vector<double>& shifts, Rng& rng);

// truth.csv + truth.kv sidecar.
void write_truth(const std::string& dir, const SimOutput& out, const SimConfig& config);

struct TruthMask {
    std::vector<std::uint8_t> injected;
};
// (match_id, team_id) -> mask, read back for evaluation.
std::map<std::pair<std::string, std::string>, TruthMask> load_truth_masks(
    const std::string& truth_csv);

} // namespace stakewatch
