#include "stakewatch/covariates.hpp"

#include <cmath>

#include "stakewatch/errors.hpp"

namespace stakewatch {

double compute_gini(double p1, double p2, double p3) {
    if (!(p1 > 0.0) || !(p2 > 0.0) || !(p3 > 0.0))
        throw DataError("compute_gini: probabilities must be positive");
    const double mean = (p1 + p2 + p3) / 3.0;
    const double sumabs =
        2.0 * (std::abs(p1 - p2) + std::abs(p1 - p3) + std::abs(p2 - p3));
    const double g = sumabs / (2.0 * 9.0 * mean);
    return 1.5 * g;  // n/(n-1) bias correction, n = 3
}

double standardize_minute(double minute, const ModelSpec& spec) {
    if (!(spec.minute_sd > 0.0))
        throw DataError("standardize_minute: minute sd is not positive (spec not prepared?)");
    return (minute - spec.minute_mean) / spec.minute_sd;
}

GoalSurprise classify_goal(double scorer_improb_start) {
    if (scorer_improb_start <= 0.25) return GoalSurprise::kSurprising;
    if (scorer_improb_start <= 0.5) return GoalSurprise::kSlightlySurprising;
    return GoalSurprise::kUnsurprising;
}

std::array<double, 3> goal_decay(const std::vector<GoalEvent>& goals, int minute,
                                 double improb_home_start, double improb_away_start) {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    const GoalEvent* last = nullptr;
    for (const auto& g : goals) {
        if (g.minute > minute) break;
        last = &g;
    }
    if (!last) return out;
    const double scorer_p = last->by_home ? improb_home_start : improb_away_start;
    const int w = static_cast<int>(classify_goal(scorer_p));
    const int since = std::max(1, minute - last->minute);  // clamp at the goal minute
    out[static_cast<std::size_t>(w)] = 1.0 / static_cast<double>(since);
    return out;
}

namespace {

std::vector<GoalEvent> extract_goals(const MatchRecord& r) {
    std::vector<GoalEvent> goals;
    int prev_home = 0, prev_away = 0;
    for (int t = 0; t < r.T; ++t) {
        // Home increments listed before away ones, so a same-minute away
        // goal counts as the most recent.
        for (int k = prev_home; k < r.goals_home[t]; ++k)
            goals.push_back({t + 1, true});
        for (int k = prev_away; k < r.goals_away[t]; ++k)
            goals.push_back({t + 1, false});
        prev_home = r.goals_home[t];
        prev_away = r.goals_away[t];
    }
    return goals;
}

TeamMatchSeries build_perspective(const MatchRecord& r, bool home,
                                  const std::vector<GoalEvent>& goals) {
    TeamMatchSeries s;
    s.match_id = r.match_id;
    s.team_id = home ? r.home_team : r.away_team;
    s.home_perspective = home;
    s.T = r.T;
    s.improb_start = home ? r.improb_home_start : r.improb_away_start;

    s.y.resize(r.T);
    s.open = r.open;
    s.halftime = r.halftime;
    s.redcard_team.resize(r.T);
    s.redcard_opponent.resize(r.T);
    s.scorediff.resize(r.T);
    s.xg_diff.resize(r.T);
    s.decay_surprising.resize(r.T);
    s.decay_slightly.resize(r.T);
    s.decay_unsurprising.resize(r.T);
    s.gini.resize(r.T);

    double last_gini = 0.0;
    for (int t = 0; t < r.T; ++t) {
        const double stake = home ? r.stake_home[t] : r.stake_away[t];
        s.y[t] = stake < kStakeZeroFloor ? 0.0 : stake;
        s.redcard_team[t] = home ? r.redcards_home[t] : r.redcards_away[t];
        s.redcard_opponent[t] = home ? r.redcards_away[t] : r.redcards_home[t];
        const int diff = r.goals_home[t] - r.goals_away[t];
        s.scorediff[t] = home ? diff : -diff;
        const double xd = r.xg_home[t] - r.xg_away[t];
        s.xg_diff[t] = home ? xd : -xd;

        const auto decay = goal_decay(goals, t + 1, r.improb_home_start, r.improb_away_start);
        s.decay_surprising[t] = decay[0];
        s.decay_slightly[t] = decay[1];
        s.decay_unsurprising[t] = decay[2];

        const double ph = r.improb_home[t], pa = r.improb_away[t], pd = r.improb_draw[t];
        if (ph > 0.0 && pa > 0.0 && pd > 0.0) {
            last_gini = compute_gini(ph, pa, pd);
        } else if (r.open[t]) {
            throw DataError("match " + r.match_id + " minute " + std::to_string(t + 1) +
                            ": open market without valid outcome probabilities");
        }
        // Closed minutes without quotes carry the last observed value; the
        // zero-probability model never reads it there (pi_t is fixed at 1).
        s.gini[t] = last_gini;
    }
    return s;
}

} // namespace

std::pair<TeamMatchSeries, TeamMatchSeries> build_team_series(const MatchRecord& record,
                                                              const ModelSpec& spec) {
    (void)spec;  // standardization constants are applied lazily in covariate_row
    record.validate();
    const auto goals = extract_goals(record);
    return {build_perspective(record, true, goals), build_perspective(record, false, goals)};
}

std::map<std::string, double> compute_team_averages(const std::vector<TeamMatchSeries>& series) {
    std::map<std::string, std::pair<double, long long>> acc;  // total stakes, open minutes
    for (const auto& s : series) {
        auto& [total, minutes] = acc[s.team_id];
        for (int t = 0; t < s.T; ++t) {
            total += s.y[t];
            if (s.open[t]) ++minutes;
        }
    }
    std::map<std::string, double> out;
    for (const auto& [team, tm] : acc) {
        if (tm.second == 0)
            throw DataError("team '" + team + "' has no open-market minutes in the corpus");
        out[team] = tm.first / static_cast<double>(tm.second);
    }
    return out;
}

} // namespace stakewatch
