#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stakewatch/fit.hpp"
#include "stakewatch/likelihood.hpp"
#include "stakewatch/match_data.hpp"

namespace stakewatch {

struct ScorePolicy {
    double threshold = 0.999;  // one-sided PIT flag threshold
    std::uint64_t seed = 0;    // randomized-PIT stream for the zero atom
};

struct MinuteScore {
    int minute = 0;  // 1-based
    bool scored = false;
    double y = 0.0;
    double pit = 0.0;
    double pred_zero = 0.0;      // predictive zero probability
    double pred_mean_log = 0.0;  // predictive mean of log stakes (positive branch)
    bool flagged = false;
};

struct SeriesScores {
    std::string match_id;
    std::string team_id;
    std::vector<MinuteScore> minutes;
};

struct WindowStat {
    std::string team_id;
    int start = 0, end = 0;
    double stat = 0.0;
};

struct MatchSummary {
    std::string match_id;
    int n_scored = 0;
    int flags = 0;
    double max_pit = 0.0;
    double sidak_p = 1.0;  // 1 - (max pit)^n_scored
    WindowStat window;
    int rank = 0;  // 1 = most anomalous
};

// One-step-ahead predictive CDF at candidate stake y given the series prefix
// y_1..y_{t-1} (t is 1-based): the prediction-weighted hurdle mixture over
// the state grid.
double predictive_cdf(const TeamMatchSeries& series, int t, double y, const Model& model,
                      const StateGrid& grid);

// Randomized PIT pseudo-residuals; closed-market minutes yield no residual.
std::vector<double> pseudo_residuals(const TeamMatchSeries& series, const Model& model,
                                     const StateGrid& grid, const ScorePolicy& policy);

SeriesScores score_series(const TeamMatchSeries& series, const Model& model,
                          const StateGrid& grid, const ScorePolicy& policy);

std::vector<SeriesScores> score_corpus(const Corpus& corpus, const Model& model,
                                       const ScorePolicy& policy);  // series in parallel
std::vector<SeriesScores> score_corpus_serial(const Corpus& corpus, const Model& model,
                                              const ScorePolicy& policy);

// Applies the one-sided flag policy to already computed scores.
void flag_outliers(std::vector<SeriesScores>& scores, const ScorePolicy& policy);

// Aggregates to match grain and ranks by the corrected minimum tail p-value.
std::vector<MatchSummary> match_report(const std::vector<SeriesScores>& scores,
                                       const ScorePolicy& policy);

void write_minute_scores(const std::string& path, const std::vector<SeriesScores>& scores);
void write_match_summaries(const std::string& path, const std::vector<MatchSummary>& summaries);
std::vector<SeriesScores> load_minute_scores(const std::string& path);
std::vector<MatchSummary> load_match_summaries(const std::string& path);

struct EvalMetrics {
    std::optional<double> minute_precision;
    std::optional<double> minute_recall;
    std::optional<double> match_precision;
    std::optional<double> match_recall;
    std::optional<double> median_rank;          // of injected matches
    std::optional<double> median_rank_share;    // median rank / match count
    std::optional<double> injected_top_share;   // share of injected in top 5%
    long long n_injected_matches = 0;
    long long n_matches = 0;
};

EvalMetrics evaluate_detection(
    const std::vector<SeriesScores>& scores, const std::vector<MatchSummary>& summaries,
    const std::map<std::pair<std::string, std::string>, struct TruthMask>& masks,
    double top_share = 0.05);

void write_eval_metrics(const std::string& path, const EvalMetrics& metrics);

} // namespace stakewatch
