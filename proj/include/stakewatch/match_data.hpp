#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stakewatch/model_spec.hpp"

namespace stakewatch {

// One match as ingested: per-minute market data for both teams, minutes
// 1..T strictly contiguous, second-half injury time already excluded.
struct MatchRecord {
    std::string match_id;
    std::string home_team;
    std::string away_team;
    int T = 0;

    double improb_home_start = 0.0;
    double improb_away_start = 0.0;

    // Per-minute arrays of length T (index 0 is minute 1).
    std::vector<std::uint8_t> open;
    std::vector<std::uint8_t> halftime;
    std::vector<double> stake_home, stake_away, stake_draw;
    std::vector<double> improb_home, improb_away, improb_draw;
    std::vector<double> xg_home, xg_away;        // cumulative expected goals
    std::vector<int> goals_home, goals_away;     // cumulative goal counts
    std::vector<int> redcards_home, redcards_away;

    void validate() const;  // throws DataError on invariant violations
};

// Covariates of one series-minute. Squares and interactions are formed by
// the predictors, not stored.
struct CovariateRow {
    // mean predictor (x1)
    double stake_avg_team = 0.0;
    double improb_start = 0.0;
    double redcard_team = 0.0;
    double redcard_opponent = 0.0;
    double scorediff = 0.0;
    double minute_std = 0.0;
    double halftime = 0.0;
    // state process (x2); decay terms are I_w / minutes-since-goal
    double decay_surprising = 0.0;
    double decay_slightly = 0.0;
    double decay_unsurprising = 0.0;
    double xg_diff = 0.0;
    // zero-probability predictor (z)
    double gini = 0.0;
};

// One team-perspective series: the unit of likelihood evaluation. Each
// MatchRecord yields exactly two of these.
struct TeamMatchSeries {
    std::string match_id;
    std::string team_id;
    bool home_perspective = false;
    int T = 0;

    std::vector<double> y;             // stakes on the team, zero-floored
    std::vector<std::uint8_t> open;
    std::vector<std::uint8_t> halftime;
    std::vector<double> redcard_team, redcard_opponent;
    std::vector<double> scorediff;
    std::vector<double> xg_diff;
    std::vector<double> decay_surprising, decay_slightly, decay_unsurprising;
    std::vector<double> gini;
    double improb_start = 0.0;

    // Fit-time corpus statistic, attached by prepare_for_fit/scoring.
    double stake_avg_team = 0.0;
    bool stake_avg_set = false;

    // t is 0-based; minute_std uses the spec's frozen constants.
    CovariateRow covariate_row(int t, const ModelSpec& spec) const;
};

struct Corpus {
    std::vector<TeamMatchSeries> series;
    double minute_mean = 0.0;
    double minute_sd = 0.0;
    std::map<std::string, double> team_avg;  // stake_avg_team per team id
    bool prepared = false;
};

// CSV schema shared by ingestion and the simulator, one row per match-minute.
extern const std::vector<std::string> kCorpusCsvColumns;

std::vector<MatchRecord> load_match_records(const std::string& path);
void write_match_records(const std::string& path, const std::vector<MatchRecord>& records);

// Mirrors every record into its two team perspectives.
Corpus corpus_from_records(const std::vector<MatchRecord>& records, const ModelSpec& spec);

// Computes and freezes fit-time constants: minute standardization (stored
// into spec) and per-team stake averages (attached to every series).
void prepare_for_fit(Corpus& corpus, ModelSpec& spec);

// Attaches previously fitted team averages; unknown team -> DataError.
void prepare_for_scoring(Corpus& corpus, const std::map<std::string, double>& team_avg);

// Order-insensitive content digest used to pin fits to their corpus.
std::uint64_t corpus_digest(const Corpus& corpus);

} // namespace stakewatch
