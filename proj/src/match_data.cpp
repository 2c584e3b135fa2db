#include "stakewatch/match_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stakewatch/covariates.hpp"
#include "stakewatch/csv.hpp"
#include "stakewatch/errors.hpp"
#include "stakewatch/rng.hpp"

namespace stakewatch {

const std::vector<std::string> kCorpusCsvColumns = {
    "match_id",       "home_team",    "away_team",     "minute",
    "open",           "stake_home",   "stake_away",    "stake_draw",
    "improb_home",    "improb_away",  "improb_draw",   "improb_home_start",
    "improb_away_start", "xg_home",   "xg_away",       "goals_home",
    "goals_away",     "redcards_home", "redcards_away", "halftime",
};

void MatchRecord::validate() const {
    auto fail = [&](const std::string& msg) {
        throw DataError("match " + match_id + ": " + msg);
    };
    if (T <= 0) fail("empty record");
    if (home_team.empty() || away_team.empty()) fail("missing team id");
    if (!(improb_home_start > 0.0 && improb_home_start < 1.0) ||
        !(improb_away_start > 0.0 && improb_away_start < 1.0))
        fail("missing or invalid pre-match probabilities");
    const std::size_t n = static_cast<std::size_t>(T);
    if (open.size() != n || halftime.size() != n || stake_home.size() != n ||
        stake_away.size() != n || stake_draw.size() != n || improb_home.size() != n ||
        improb_away.size() != n || improb_draw.size() != n || xg_home.size() != n ||
        xg_away.size() != n || goals_home.size() != n || goals_away.size() != n ||
        redcards_home.size() != n || redcards_away.size() != n)
        fail("ragged per-minute arrays");
    for (int t = 0; t < T; ++t) {
        const std::string at = " at minute " + std::to_string(t + 1);
        if (stake_home[t] < 0.0 || stake_away[t] < 0.0 || stake_draw[t] < 0.0)
            fail("negative stake" + at);
        if (!open[t] && (stake_home[t] >= kStakeZeroFloor || stake_away[t] >= kStakeZeroFloor))
            fail("positive stake on closed market" + at);
        if (open[t]) {
            if (!(improb_home[t] > 0.0 && improb_home[t] < 1.0) ||
                !(improb_away[t] > 0.0 && improb_away[t] < 1.0) ||
                !(improb_draw[t] > 0.0 && improb_draw[t] < 1.0))
                fail("open market without all three outcome probabilities" + at);
        }
        if (t > 0) {
            if (goals_home[t] < goals_home[t - 1] || goals_away[t] < goals_away[t - 1])
                fail("goal counters decrease" + at);
            if (redcards_home[t] < redcards_home[t - 1] || redcards_away[t] < redcards_away[t - 1])
                fail("red-card counters decrease" + at);
            if (xg_home[t] < xg_home[t - 1] - 1e-12 || xg_away[t] < xg_away[t - 1] - 1e-12)
                fail("cumulative expected goals decrease" + at);
        }
    }
}

std::vector<MatchRecord> load_match_records(const std::string& path) {
    CsvReader reader(path);
    for (const auto& col : kCorpusCsvColumns) {
        if (!reader.has_column(col))
            throw DataError(path + ": missing column '" + col + "'");
    }

    std::vector<MatchRecord> records;
    MatchRecord* cur = nullptr;
    while (reader.next_row()) {
        const std::string id = reader.raw("match_id");
        if (!cur || cur->match_id != id) {
            for (const auto& r : records) {
                if (r.match_id == id)
                    throw DataError(path + ":" + std::to_string(reader.line_number()) +
                                    ": rows of match " + id + " are not contiguous");
            }
            records.emplace_back();
            cur = &records.back();
            cur->match_id = id;
            cur->home_team = reader.raw("home_team");
            cur->away_team = reader.raw("away_team");
            cur->improb_home_start = reader.number("improb_home_start");
            cur->improb_away_start = reader.number("improb_away_start");
        }
        const long long minute = reader.integer("minute");
        if (minute != cur->T + 1) {
            std::ostringstream os;
            os << path << ":" << reader.line_number() << ": match " << id
               << ": expected minute " << (cur->T + 1) << ", got " << minute;
            throw DataError(os.str());
        }
        ++cur->T;
        cur->open.push_back(reader.flag01("open"));
        cur->halftime.push_back(reader.flag01("halftime"));
        auto floored = [](double v) { return v < kStakeZeroFloor ? 0.0 : v; };
        cur->stake_home.push_back(floored(reader.number("stake_home")));
        cur->stake_away.push_back(floored(reader.number("stake_away")));
        cur->stake_draw.push_back(floored(reader.number("stake_draw")));
        cur->improb_home.push_back(reader.number("improb_home"));
        cur->improb_away.push_back(reader.number("improb_away"));
        cur->improb_draw.push_back(reader.number("improb_draw"));
        cur->xg_home.push_back(reader.number("xg_home"));
        cur->xg_away.push_back(reader.number("xg_away"));
        cur->goals_home.push_back(static_cast<int>(reader.integer("goals_home")));
        cur->goals_away.push_back(static_cast<int>(reader.integer("goals_away")));
        cur->redcards_home.push_back(static_cast<int>(reader.integer("redcards_home")));
        cur->redcards_away.push_back(static_cast<int>(reader.integer("redcards_away")));
    }
    if (records.empty()) throw DataError(path + ": no data rows");
    for (const auto& r : records) r.validate();
    return records;
}

void write_match_records(const std::string& path, const std::vector<MatchRecord>& records) {
    CsvWriter w(path, kCorpusCsvColumns);
    for (const auto& r : records) {
        for (int t = 0; t < r.T; ++t) {
            w.field(r.match_id)
                .field(r.home_team)
                .field(r.away_team)
                .field(static_cast<long long>(t + 1))
                .field(static_cast<long long>(r.open[t]))
                .field(r.stake_home[t])
                .field(r.stake_away[t])
                .field(r.stake_draw[t])
                .field(r.improb_home[t])
                .field(r.improb_away[t])
                .field(r.improb_draw[t])
                .field(r.improb_home_start)
                .field(r.improb_away_start)
                .field(r.xg_home[t])
                .field(r.xg_away[t])
                .field(static_cast<long long>(r.goals_home[t]))
                .field(static_cast<long long>(r.goals_away[t]))
                .field(static_cast<long long>(r.redcards_home[t]))
                .field(static_cast<long long>(r.redcards_away[t]))
                .field(static_cast<long long>(r.halftime[t]));
            w.end_row();
        }
    }
    w.close();
}

CovariateRow TeamMatchSeries::covariate_row(int t, const ModelSpec& spec) const {
    CovariateRow row;
    row.stake_avg_team = stake_avg_team;
    row.improb_start = improb_start;
    row.redcard_team = redcard_team[t];
    row.redcard_opponent = redcard_opponent[t];
    row.scorediff = scorediff[t];
    row.minute_std = standardize_minute(t + 1, spec);
    row.halftime = halftime[t] ? 1.0 : 0.0;
    row.decay_surprising = decay_surprising[t];
    row.decay_slightly = decay_slightly[t];
    row.decay_unsurprising = decay_unsurprising[t];
    row.xg_diff = xg_diff[t];
    row.gini = gini[t];
    return row;
}

Corpus corpus_from_records(const std::vector<MatchRecord>& records, const ModelSpec& spec) {
    Corpus corpus;
    corpus.series.reserve(records.size() * 2);
    for (const auto& r : records) {
        auto [home, away] = build_team_series(r, spec);
        corpus.series.push_back(std::move(home));
        corpus.series.push_back(std::move(away));
    }
    return corpus;
}

void prepare_for_fit(Corpus& corpus, ModelSpec& spec) {
    if (corpus.series.empty()) throw DataError("empty corpus");
    // Corpus-level minute standardization constants.
    double sum = 0.0, sumsq = 0.0;
    long long n = 0;
    for (const auto& s : corpus.series) {
        for (int t = 1; t <= s.T; ++t) {
            sum += t;
            sumsq += static_cast<double>(t) * t;
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sumsq / static_cast<double>(n) - mean * mean;
    if (!(var > 0.0)) throw DataError("degenerate minute distribution in corpus");
    corpus.minute_mean = mean;
    corpus.minute_sd = std::sqrt(var);
    spec.minute_mean = mean;
    spec.minute_sd = corpus.minute_sd;

    corpus.team_avg = compute_team_averages(corpus.series);
    for (auto& s : corpus.series) {
        s.stake_avg_team = corpus.team_avg.at(s.team_id);
        s.stake_avg_set = true;
    }
    corpus.prepared = true;
}

void prepare_for_scoring(Corpus& corpus, const std::map<std::string, double>& team_avg) {
    for (auto& s : corpus.series) {
        const auto it = team_avg.find(s.team_id);
        if (it == team_avg.end())
            throw DataError("unknown team '" + s.team_id +
                            "': no stake_avg_team from the fitting corpus");
        s.stake_avg_team = it->second;
        s.stake_avg_set = true;
    }
    corpus.team_avg = team_avg;
    corpus.prepared = true;
}

std::uint64_t corpus_digest(const Corpus& corpus) {
    // Order-insensitive: XOR of per-series digests.
    std::uint64_t acc = 0x5bd1e995u;
    for (const auto& s : corpus.series) {
        std::uint64_t h = fnv1a64(s.match_id);
        h = fnv1a64(s.team_id, h);
        h = fnv1a64(s.home_perspective ? "H" : "A", h);
        for (int t = 0; t < s.T; ++t) {
            const double v = s.y[t];
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(v));
            std::memcpy(&bits, &v, sizeof(bits));
            h ^= bits + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h ^= static_cast<std::uint64_t>(s.open[t]) + (h << 3);
        }
        acc ^= h;
    }
    return acc;
}

} // namespace stakewatch
