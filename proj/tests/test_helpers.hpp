// Shared helpers for constructing small synthetic series in tests.
#pragma once

#include <string>
#include <vector>

#include "stakewatch/match_data.hpp"
#include "stakewatch/rng.hpp"

namespace testutil {

using stakewatch::ModelSpec;
using stakewatch::TeamMatchSeries;

// A bare series with all covariates zeroed: open market everywhere unless
// closed_minutes marks otherwise (1-based minutes).
inline TeamMatchSeries plain_series(const std::vector<double>& stakes,
                                    const std::vector<int>& closed_minutes = {}) {
    TeamMatchSeries s;
    s.match_id = "M00001";
    s.team_id = "T01";
    s.home_perspective = true;
    s.T = static_cast<int>(stakes.size());
    s.y = stakes;
    s.open.assign(stakes.size(), 1);
    for (int m : closed_minutes) s.open[static_cast<std::size_t>(m - 1)] = 0;
    for (std::size_t i = 0; i < stakes.size(); ++i)
        if (!s.open[i]) s.y[i] = 0.0;
    s.halftime.assign(stakes.size(), 0);
    s.redcard_team.assign(stakes.size(), 0.0);
    s.redcard_opponent.assign(stakes.size(), 0.0);
    s.scorediff.assign(stakes.size(), 0.0);
    s.xg_diff.assign(stakes.size(), 0.0);
    s.decay_surprising.assign(stakes.size(), 0.0);
    s.decay_slightly.assign(stakes.size(), 0.0);
    s.decay_unsurprising.assign(stakes.size(), 0.0);
    s.gini.assign(stakes.size(), 0.0);
    s.improb_start = 0.4;
    s.stake_avg_team = 1.0;
    s.stake_avg_set = true;
    return s;
}

// Spec with neutral minute standardization so covariate_row works on tiny
// series without a prepared corpus.
inline ModelSpec plain_spec(stakewatch::Variant variant = stakewatch::Variant::kBaseline,
                            int grid_m = 100, double bound = 5.0) {
    ModelSpec spec;
    spec.variant = variant;
    spec.grid_m = grid_m;
    spec.grid_bound = bound;
    spec.minute_mean = 5.0;
    spec.minute_sd = 3.0;
    return spec;
}

inline std::vector<double> random_stakes(int T, std::uint64_t seed, double zero_share = 0.15) {
    stakewatch::Rng rng(seed);
    std::vector<double> y(static_cast<std::size_t>(T));
    for (auto& v : y)
        v = rng.bernoulli(zero_share) ? 0.0 : std::exp(rng.normal(-0.5, 1.2));
    return y;
}

} // namespace testutil
