#pragma once

#include <array>
#include <utility>
#include <vector>

#include "stakewatch/match_data.hpp"

namespace stakewatch {

// Stakes below this are treated as exact zeros at ingestion; guards the log
// transform against denormal noise in the feed.
inline constexpr double kStakeZeroFloor = 1e-6;

// Bias-corrected Gini coefficient of the three outcome probabilities:
// (n/(n-1)) * sum_{i,j} |p_i - p_j| / (2 n^2 mean), n = 3. Equals 0 for a
// uniform market and approaches 1 for a fully decided one. Inputs must be
// positive; raw implied probabilities are used (overround not removed).
double compute_gini(double p1, double p2, double p3);

// (minute - mean) / sd with the spec's frozen constants; sd = 0 rejected.
double standardize_minute(double minute, const ModelSpec& spec);

// Goal classified by the scoring side's pre-match implied probability p:
// surprising (p <= 0.25), slightly surprising (0.25 < p <= 0.5),
// unsurprising (p > 0.5).
enum class GoalSurprise { kSurprising = 0, kSlightlySurprising = 1, kUnsurprising = 2 };
GoalSurprise classify_goal(double scorer_improb_start);

struct GoalEvent {
    int minute = 0;       // 1-based
    bool by_home = false;
};

// Decay terms (I_1/g, I_2/g, I_3/g) at the given minute: the most recent
// goal up to and including that minute sets the category, g = minutes since
// that goal clamped to >= 1, all zero if no goal yet. Goals must be sorted
// by minute; for two goals in the same minute the later list entry wins.
std::array<double, 3> goal_decay(const std::vector<GoalEvent>& goals, int minute,
                                 double improb_home_start, double improb_away_start);

// Builds the two team-perspective series of one record (home first).
std::pair<TeamMatchSeries, TeamMatchSeries> build_team_series(const MatchRecord& record,
                                                              const ModelSpec& spec);

// Per-team average stakes per open-market minute over the fitting corpus.
std::map<std::string, double> compute_team_averages(const std::vector<TeamMatchSeries>& series);

} // namespace stakewatch
