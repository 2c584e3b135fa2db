#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "stakewatch/covariates.hpp"
#include "stakewatch/errors.hpp"
#include "stakewatch/simulator.hpp"
#include "test_helpers.hpp"

using namespace stakewatch;

TEST_CASE("seed determinism: identical config gives identical corpora") {
    SimConfig config = sim_config_defaults(Variant::kBaseline);
    config.matches = 12;
    config.seed = 123;
    const SimOutput a = simulate_corpus(config);
    const SimOutput b = simulate_corpus(config);
    REQUIRE(a.matches.size() == b.matches.size());
    for (std::size_t i = 0; i < a.matches.size(); ++i) {
        CHECK(a.matches[i].record.stake_home == b.matches[i].record.stake_home);
        CHECK(a.matches[i].record.stake_away == b.matches[i].record.stake_away);
        CHECK(a.matches[i].record.open == b.matches[i].record.open);
        CHECK(a.matches[i].home.s == b.matches[i].home.s);
    }
    // and parallel equals serial
    const SimOutput c = simulate_corpus_serial(config);
    for (std::size_t i = 0; i < a.matches.size(); ++i)
        CHECK(a.matches[i].record.stake_home == c.matches[i].record.stake_home);
}

TEST_CASE("different seeds differ") {
    SimConfig config = sim_config_defaults(Variant::kBaseline);
    config.matches = 2;
    config.seed = 1;
    SimConfig other = config;
    other.seed = 2;
    CHECK(simulate_corpus(config).matches[0].record.stake_home !=
          simulate_corpus(other).matches[0].record.stake_home);
}

TEST_CASE("latent path law: degenerate noise, autocorrelation, stationary sd") {
    SUBCASE("sigma_s -> 0 with zero shifts pins the path at its start") {
        ModelSpec spec;
        ParameterSet theta = ParameterSet::zeros(spec);
        theta.phi = 0.9;
        theta.sigma_s = 1e-12;
        Rng rng(5);
        const auto path = simulate_latent_path(theta, 200, {}, rng);
        for (double v : path) CHECK(std::abs(v) < 1e-9);
    }
    SUBCASE("moderate persistence: empirical acf and sd match the law") {
        ModelSpec spec;
        ParameterSet theta = ParameterSet::zeros(spec);
        theta.phi = 0.9;
        theta.sigma_s = 0.3;
        Rng rng(6);
        const auto path = simulate_latent_path(theta, 200000, {}, rng);
        CHECK(oracles::lag1_autocorr(path) == doctest::Approx(0.9).epsilon(0.01));
        const double stat_sd = 0.3 / std::sqrt(1.0 - 0.81);
        CHECK(oracles::sd_of(path) == doctest::Approx(stat_sd).epsilon(0.02));
    }
    SUBCASE("reference persistence: acf within 0.01") {
        ParameterSet theta = reference_baseline_parameters();
        Rng rng(7);
        const auto path = simulate_latent_path(theta, 100000, {}, rng);
        CHECK(oracles::lag1_autocorr(path) == doctest::Approx(theta.phi).epsilon(0.011));
    }
}

TEST_CASE("corpus calibration targets at default settings") {
    SimConfig config = sim_config_defaults(Variant::kBaseline);
    config.matches = 1000;
    config.seed = 2029;
    const SimOutput out = simulate_corpus(config);

    long long goals = 0, closed = 0, minutes = 0, zero_open = 0, open_minutes = 0;
    std::vector<double> ginis, xgdiffs;
    ModelSpec spec = out.spec;
    std::vector<TeamMatchSeries> all_series;
    for (const auto& sm : out.matches) {
        const auto& r = sm.record;
        goals += r.goals_home[r.T - 1] + r.goals_away[r.T - 1];
        for (int t = 0; t < r.T; ++t) {
            ++minutes;
            if (!r.open[t]) ++closed;
        }
        auto [home, away] = build_team_series(r, spec);
        for (int t = 0; t < r.T; ++t) {
            ginis.push_back(home.gini[t]);
            xgdiffs.push_back(home.xg_diff[t]);
            if (home.open[t]) {
                open_minutes += 2;
                if (home.y[t] == 0.0) ++zero_open;
                if (away.y[t] == 0.0) ++zero_open;
            }
        }
        all_series.push_back(std::move(home));
        all_series.push_back(std::move(away));
    }

    // mean total goals ~ 2.32 +- 0.1
    const double goal_mean = static_cast<double>(goals) / config.matches;
    CHECK(goal_mean == doctest::Approx(2.32).epsilon(0.045));

    // closed-market share ~ 9.8% +- 1.5pp
    const double closed_share = static_cast<double>(closed) / minutes;
    CHECK(closed_share > 0.083);
    CHECK(closed_share < 0.113);

    // zero-stake share on open minutes = pi +- 0.003 (forced constant here)
    const double zero_share = static_cast<double>(zero_open) / open_minutes;
    CHECK(zero_share == doctest::Approx(0.094).epsilon(0.032));

    // gini mean ~ 0.45, xg_diff sd ~ 0.71
    CHECK(oracles::mean_of(ginis) == doctest::Approx(0.45).epsilon(0.12));
    CHECK(oracles::sd_of(xgdiffs) == doctest::Approx(0.71).epsilon(0.15));

    // corpus-wide mean of per-team stake averages ~ 1.42
    const auto team_avg = compute_team_averages(all_series);
    double avg_sum = 0.0;
    for (const auto& [team, avg] : team_avg) avg_sum += avg;
    CHECK(avg_sum / static_cast<double>(team_avg.size()) ==
          doctest::Approx(1.42).epsilon(0.11));

    // pre-match implied probabilities: mean ~ 0.35, range inside (0,1)
    std::vector<double> improbs;
    for (const auto& sm : out.matches) {
        improbs.push_back(sm.record.improb_home_start);
        improbs.push_back(sm.record.improb_away_start);
        CHECK(sm.record.improb_home_start > 0.0);
        CHECK(sm.record.improb_home_start < 1.0);
    }
    CHECK(oracles::mean_of(improbs) == doctest::Approx(0.35).epsilon(0.15));
}

TEST_CASE("emission law: log positive stakes are normal at fixed (nu, s)") {
    // 100 cells of fresh draws from the positive branch; Anderson-Darling
    // with known parameters at the 5% level must pass in >= 90 of them.
    ParameterSet theta = reference_baseline_parameters();
    int passes = 0;
    for (int cell = 0; cell < 100; ++cell) {
        Rng rng(900 + cell);
        const double nu = -0.783, s = 0.37;
        std::vector<double> logs;
        for (int i = 0; i < 60; ++i)
            logs.push_back(nu + s + theta.sigma * rng.normal());
        if (oracles::ad_statistic_normal(logs, nu + s, theta.sigma) < 2.492) ++passes;
    }
    CHECK(passes >= 90);
}

TEST_CASE("injection mechanics") {
    SimConfig config = sim_config_defaults(Variant::kBaseline);
    config.matches = 3;
    config.seed = 77;
    SimOutput out = simulate_corpus(config);
    SimulatedMatch& sm = out.matches[0];

    SUBCASE("factor must exceed 1") {
        AnomalyInjection inj;
        inj.factor = 1.0;
        Rng rng(1);
        CHECK_THROWS_AS(inject_anomaly(sm.record, sm.home, inj, config.theta, rng),
                        DataError);
    }

    SUBCASE("masked minutes scale exactly by the factor; others untouched") {
        const std::vector<double> before = sm.record.stake_home;
        AnomalyInjection inj;
        inj.target_home = true;
        inj.factor = 8.0;
        inj.duration = 3;
        Rng rng(2);
        const InjectionOutcome outcome =
            inject_anomaly(sm.record, sm.home, inj, config.theta, rng);
        REQUIRE(outcome.minutes.size() == 3);
        for (int t = 1; t <= sm.record.T; ++t) {
            const bool masked = sm.home.injected[t - 1] != 0;
            if (masked) {
                CHECK(sm.record.open[t - 1] == 1);
                if (before[t - 1] > 0.0)
                    CHECK(sm.record.stake_home[t - 1] ==
                          doctest::Approx(8.0 * before[t - 1]).epsilon(1e-15));
                else
                    CHECK(sm.record.stake_home[t - 1] > 0.0);
            } else {
                CHECK(sm.record.stake_home[t - 1] == before[t - 1]);
            }
        }
        // mask minutes are contiguous and exactly the outcome list
        for (std::size_t k = 1; k < outcome.minutes.size(); ++k)
            CHECK(outcome.minutes[k] == outcome.minutes[k - 1] + 1);
        // away side untouched
        CHECK(sm.home.y_pre == before);
    }

    SUBCASE("requested closed window shifts to the nearest open span") {
        // find a closed minute
        int closed_minute = -1;
        for (int t = 1; t <= sm.record.T; ++t)
            if (!sm.record.open[t - 1]) {
                closed_minute = t;
                break;
            }
        if (closed_minute > 0) {
            AnomalyInjection inj;
            inj.target_home = false;
            inj.factor = 4.0;
            inj.duration = 2;
            inj.start_minute = closed_minute;
            Rng rng(3);
            const InjectionOutcome outcome =
                inject_anomaly(sm.record, sm.away, inj, config.theta, rng);
            CHECK(outcome.shifted);
            for (int minute : outcome.minutes) CHECK(sm.record.open[minute - 1] == 1);
        }
    }

    SUBCASE("no open window -> rejection") {
        MatchRecord frozen = out.matches[1].record;
        for (int t = 0; t < frozen.T; ++t) {
            frozen.open[t] = 0;
            frozen.stake_home[t] = frozen.stake_away[t] = frozen.stake_draw[t] = 0.0;
        }
        AnomalyInjection inj;
        inj.factor = 8.0;
        Rng rng(4);
        CHECK_THROWS_AS(inject_anomaly(frozen, out.matches[1].home, inj, config.theta, rng),
                        DataError);
    }

    SUBCASE("pre-goal placement ends right before the first roomy goal") {
        SimConfig cfg = config;
        cfg.matches = 40;
        cfg.seed = 31;
        SimOutput big = simulate_corpus(cfg);
        for (auto& m : big.matches) {
            // first goal minute with room
            int goal_minute = 0;
            int prev = 0;
            for (int t = 0; t < m.record.T; ++t) {
                const int g = m.record.goals_home[t] + m.record.goals_away[t];
                if (g > prev && (t + 1) - 3 >= 1) {
                    goal_minute = t + 1;
                    break;
                }
                prev = g;
            }
            if (goal_minute == 0) continue;
            AnomalyInjection inj;
            inj.target_home = true;
            inj.factor = 8.0;
            inj.duration = 3;
            inj.pre_goal = true;
            Rng rng(5);
            const InjectionOutcome outcome =
                inject_anomaly(m.record, m.home, inj, config.theta, rng);
            if (!outcome.shifted) {
                CHECK(outcome.minutes.back() == goal_minute - 1);
                break;
            }
        }
    }
}

TEST_CASE("simulated records pass ingestion validation and round trip") {
    namespace fs = std::filesystem;
    SimConfig config = sim_config_defaults(Variant::kFull);
    config.matches = 6;
    config.seed = 8;
    config.inject_count = 2;
    const SimOutput out = simulate_corpus(config);

    const fs::path dir = fs::temp_directory_path() / "sw_test_sim";
    fs::create_directories(dir);
    std::vector<MatchRecord> records;
    for (const auto& sm : out.matches) records.push_back(sm.record);
    write_match_records((dir / "corpus.csv").string(), records);
    const auto loaded = load_match_records((dir / "corpus.csv").string());
    CHECK(loaded.size() == records.size());
    for (std::size_t i = 0; i < loaded.size(); ++i)
        CHECK(loaded[i].stake_home == records[i].stake_home);  // exact round trip

    write_truth(dir.string(), out, config);
    const auto masks = load_truth_masks((dir / "truth.csv").string());
    long long masked = 0;
    for (const auto& [key, mask] : masks)
        for (auto b : mask.injected) masked += b;
    CHECK(masked == 2 * config.inject_duration);
}

TEST_CASE("row count: matches x (play + halftime) minutes, two series each") {
    SimConfig config = sim_config_defaults(Variant::kBaseline);
    config.matches = 5;
    config.seed = 3;
    const SimOutput out = simulate_corpus(config);
    long long rows = 0;
    for (const auto& sm : out.matches) rows += sm.record.T;
    CHECK(rows == 5 * (90 + 15));
    // mirroring doubles it
    ModelSpec spec = out.spec;
    std::vector<MatchRecord> records;
    for (const auto& sm : out.matches) records.push_back(sm.record);
    const Corpus corpus = corpus_from_records(records, spec);
    long long series_minutes = 0;
    for (const auto& s : corpus.series) series_minutes += s.T;
    CHECK(series_minutes == 2 * rows);
}
