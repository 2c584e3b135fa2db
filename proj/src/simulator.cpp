#include "stakewatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stakewatch/covariates.hpp"
#include "stakewatch/csv.hpp"
#include "stakewatch/emission.hpp"
#include "stakewatch/errors.hpp"
#include "stakewatch/kvconfig.hpp"
#include "stakewatch/mathutil.hpp"

namespace stakewatch {

void SimConfig::validate() const {
    if (matches < 1) throw ConfigError("matches must be positive");
    if (minutes_per_half < 5) throw ConfigError("minutes_per_half must be at least 5");
    if (halftime_minutes < 0) throw ConfigError("halftime_minutes must be nonnegative");
    if (teams < 2) throw ConfigError("teams must be at least 2");
    if (!(goal_rate >= 0.0) || !(redcard_rate >= 0.0))
        throw ConfigError("event rates must be nonnegative");
    if (closure_event_minutes < 0) throw ConfigError("closure.event_minutes must be nonnegative");
    if (!(overround > 0.0)) throw ConfigError("overround must be positive");
    if (inject_count < 0 || inject_count > matches)
        throw ConfigError("inject.count must be between 0 and matches");
    if (inject_count > 0 && !(inject_factor > 1.0))
        throw ConfigError("inject.factor must exceed 1");
    if (inject_count > 0 && inject_duration < 1)
        throw ConfigError("inject.duration must be at least 1");
    ModelSpec spec;
    spec.variant = variant;
    theta.check_arity(spec);
    if (!(std::abs(theta.phi) < 1.0) || !(theta.sigma_s > 0.0) || !(theta.sigma > 0.0))
        throw ConfigError("theta violates |phi|<1 or positivity of the scale parameters");
}

SimConfig sim_config_defaults(Variant variant) {
    SimConfig config;
    config.variant = variant;
    switch (variant) {
        case Variant::kBaseline: config.theta = reference_baseline_parameters(); break;
        case Variant::kStateDep: config.theta = reference_state_dep_parameters(); break;
        case Variant::kFull: config.theta = reference_full_parameters(); break;
    }
    return config;
}

SimConfig sim_config_from_kv(const KvMap& kv) {
    const Variant variant = variant_from_string(kv.get_string("model", "baseline"));
    SimConfig c = sim_config_defaults(variant);
    c.matches = static_cast<int>(kv.get_int("matches", c.matches));
    c.minutes_per_half = static_cast<int>(kv.get_int("minutes_per_half", c.minutes_per_half));
    c.halftime_minutes = static_cast<int>(kv.get_int("halftime_minutes", c.halftime_minutes));
    c.teams = static_cast<int>(kv.get_int("teams", c.teams));
    c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
    c.goal_rate = kv.get_double("goal_rate", c.goal_rate);
    c.redcard_rate = kv.get_double("redcard_rate", c.redcard_rate);
    c.closure_event_minutes =
        static_cast<int>(kv.get_int("closure.event_minutes", c.closure_event_minutes));
    c.closure_decided_lead =
        static_cast<int>(kv.get_int("closure.decided_lead", c.closure_decided_lead));
    c.closure_decided_from =
        static_cast<int>(kv.get_int("closure.decided_from", c.closure_decided_from));
    c.overround = kv.get_double("overround", c.overround);
    c.sentiment_mu = kv.get_double("sentiment.mu", c.sentiment_mu);
    c.sentiment_sigma = kv.get_double("sentiment.sigma", c.sentiment_sigma);
    c.strength_sigma = kv.get_double("strength.sigma", c.strength_sigma);
    c.home_advantage = kv.get_double("home_advantage", c.home_advantage);
    c.shot_rate = kv.get_double("shots.rate", c.shot_rate);
    c.shot_xg_lo = kv.get_double("shots.xg_lo", c.shot_xg_lo);
    c.shot_xg_hi = kv.get_double("shots.xg_hi", c.shot_xg_hi);
    c.goal_xg_lo = kv.get_double("shots.goal_xg_lo", c.goal_xg_lo);
    c.goal_xg_hi = kv.get_double("shots.goal_xg_hi", c.goal_xg_hi);
    c.draw_stake_scale = kv.get_double("draw.scale", c.draw_stake_scale);
    c.inject_count = static_cast<int>(kv.get_int("inject.count", c.inject_count));
    c.inject_factor = kv.get_double("inject.factor", c.inject_factor);
    c.inject_duration = static_cast<int>(kv.get_int("inject.duration", c.inject_duration));
    c.inject_pre_goal = kv.get_bool("inject.pre_goal", c.inject_pre_goal);

    // Optional overrides of the generative parameters.
    ModelSpec spec;
    spec.variant = variant;
    auto opt = [&](const std::string& key, double& target) {
        if (kv.has(key)) target = kv.get_double(key);
    };
    opt("theta.phi", c.theta.phi);
    opt("theta.sigma_s", c.theta.sigma_s);
    opt("theta.sigma", c.theta.sigma);
    opt("theta.pi", c.theta.pi_const);
    for (int i = 0; i < spec.beta_arity(); ++i) opt("theta.beta" + std::to_string(i), c.theta.beta[i]);
    for (int i = 0; i < spec.omega_arity(); ++i)
        opt("theta.omega" + std::to_string(i + 1), c.theta.omega[i]);
    for (int i = 0; i < spec.alpha_arity(); ++i)
        opt("theta.alpha" + std::to_string(i), c.theta.alpha[i]);
    c.validate();
    return c;
}

namespace {

struct CorpusSetup {
    std::vector<std::string> team_ids;
    std::vector<double> strength;   // multiplicative scoring strength
    std::vector<double> sentiment;  // generative stake_avg_team level
    std::vector<std::pair<int, int>> pairings;
    std::vector<std::uint8_t> injected;  // per match
};

CorpusSetup make_setup(const SimConfig& config) {
    CorpusSetup setup;
    Rng rng = Rng::stream(config.seed, "corpus");
    setup.team_ids.resize(config.teams);
    setup.strength.resize(config.teams);
    setup.sentiment.resize(config.teams);
    for (int i = 0; i < config.teams; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "T%02d", i + 1);
        setup.team_ids[i] = buf;
        setup.strength[i] = std::exp(config.strength_sigma * rng.normal());
        setup.sentiment[i] = std::exp(config.sentiment_mu + config.sentiment_sigma * rng.normal());
    }
    setup.pairings.resize(config.matches);
    for (int g = 0; g < config.matches; ++g) {
        const int home = static_cast<int>(rng.below(config.teams));
        int away = static_cast<int>(rng.below(config.teams - 1));
        if (away >= home) ++away;
        setup.pairings[g] = {home, away};
    }
    setup.injected.assign(config.matches, 0);
    if (config.inject_count > 0) {
        Rng pick = Rng::stream(config.seed, "inject-pick");
        std::vector<int> idx(config.matches);
        for (int i = 0; i < config.matches; ++i) idx[i] = i;
        for (int i = 0; i < config.inject_count; ++i) {
            const int j = i + static_cast<int>(pick.below(config.matches - i));
            std::swap(idx[i], idx[j]);
            setup.injected[idx[i]] = 1;
        }
    }
    return setup;
}

// Outcome probabilities from the remaining-goals model: both teams score
// Poisson goals over the remaining play minutes, truncated at 12.
struct OutcomeProbs {
    double home, draw, away;
};

OutcomeProbs outcome_probs(double lambda_home, double lambda_away, double remaining_share,
                           int scorediff) {
    constexpr int kMax = 12;
    double ph[kMax + 1], pa[kMax + 1];
    const double mh = std::max(1e-12, lambda_home * remaining_share);
    const double ma = std::max(1e-12, lambda_away * remaining_share);
    double eh = std::exp(-mh), ea = std::exp(-ma);
    for (int k = 0; k <= kMax; ++k) {
        ph[k] = eh;
        pa[k] = ea;
        eh *= mh / (k + 1);
        ea *= ma / (k + 1);
    }
    OutcomeProbs p{0.0, 0.0, 0.0};
    for (int a = 0; a <= kMax; ++a) {
        for (int b = 0; b <= kMax; ++b) {
            const int diff = scorediff + a - b;
            const double w = ph[a] * pa[b];
            if (diff > 0)
                p.home += w;
            else if (diff < 0)
                p.away += w;
            else
                p.draw += w;
        }
    }
    const double total = p.home + p.draw + p.away;
    p.home /= total;
    p.draw /= total;
    p.away /= total;
    return p;
}

ModelSpec generative_spec(const SimConfig& config) {
    ModelSpec spec;
    spec.variant = config.variant;
    const double T = config.total_minutes();
    spec.minute_mean = (T + 1.0) / 2.0;
    spec.minute_sd = std::sqrt((T * T - 1.0) / 12.0);
    return spec;
}

SimulatedMatch simulate_one(const SimConfig& config, const CorpusSetup& setup,
                            const ModelSpec& spec, int match_index) {
    const int T = config.total_minutes();
    const int half = config.minutes_per_half;
    const int ht = config.halftime_minutes;
    Rng rng = Rng::stream(config.seed, "match", static_cast<std::uint64_t>(match_index));

    SimulatedMatch sm;
    MatchRecord& r = sm.record;
    {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "M%05d", match_index + 1);
        r.match_id = buf;
    }
    const auto [hi, ai] = setup.pairings[match_index];
    r.home_team = setup.team_ids[hi];
    r.away_team = setup.team_ids[ai];
    r.T = T;

    const double sh =
        setup.strength[hi] * config.home_advantage /
        (setup.strength[hi] * config.home_advantage + setup.strength[ai]);
    const double lambda_home = config.goal_rate * sh;
    const double lambda_away = config.goal_rate * (1.0 - sh);

    auto is_halftime = [&](int t) { return t > half && t <= half + ht; };  // 1-based
    auto play_minutes_after = [&](int t) {
        // play minutes strictly after wall minute t
        int played = 0;
        for (int u = t + 1; u <= T; ++u)
            if (!is_halftime(u)) ++played;
        return played;
    };

    const OutcomeProbs pre = outcome_probs(lambda_home, lambda_away, 1.0, 0);
    r.improb_home_start = std::min(0.9995, pre.home * config.overround);
    r.improb_away_start = std::min(0.9995, pre.away * config.overround);

    r.open.assign(T, 1);
    r.halftime.assign(T, 0);
    r.stake_home.assign(T, 0.0);
    r.stake_away.assign(T, 0.0);
    r.stake_draw.assign(T, 0.0);
    r.improb_home.assign(T, 0.0);
    r.improb_away.assign(T, 0.0);
    r.improb_draw.assign(T, 0.0);
    r.xg_home.assign(T, 0.0);
    r.xg_away.assign(T, 0.0);
    r.goals_home.assign(T, 0);
    r.goals_away.assign(T, 0);
    r.redcards_home.assign(T, 0);
    r.redcards_away.assign(T, 0);

    // Event pass: goals, red cards, xg, market state.
    int goals_h = 0, goals_a = 0, reds_h = 0, reds_a = 0;
    double xg_h = 0.0, xg_a = 0.0;
    int closed_until = 0;  // wall minute through which the market stays closed
    const int total_play = 2 * half;
    for (int t = 1; t <= T; ++t) {
        const bool in_half_time = is_halftime(t);
        r.halftime[t - 1] = in_half_time ? 1 : 0;
        if (!in_half_time) {
            const bool goal_h = rng.bernoulli(lambda_home / total_play);
            const bool goal_a = rng.bernoulli(lambda_away / total_play);
            const bool red_h = reds_h < 2 && rng.bernoulli(config.redcard_rate / 2.0 / total_play);
            const bool red_a = reds_a < 2 && rng.bernoulli(config.redcard_rate / 2.0 / total_play);
            if (goal_h) {
                ++goals_h;
                xg_h += rng.uniform(config.goal_xg_lo, config.goal_xg_hi);
            } else if (rng.bernoulli(config.shot_rate)) {
                xg_h += rng.uniform(config.shot_xg_lo, config.shot_xg_hi);
            }
            if (goal_a) {
                ++goals_a;
                xg_a += rng.uniform(config.goal_xg_lo, config.goal_xg_hi);
            } else if (rng.bernoulli(config.shot_rate)) {
                xg_a += rng.uniform(config.shot_xg_lo, config.shot_xg_hi);
            }
            if (red_h) ++reds_h;
            if (red_a) ++reds_a;
            if (goal_h || goal_a || red_h || red_a)
                closed_until = std::max(closed_until, t + config.closure_event_minutes - 1);
        }
        r.goals_home[t - 1] = goals_h;
        r.goals_away[t - 1] = goals_a;
        r.redcards_home[t - 1] = reds_h;
        r.redcards_away[t - 1] = reds_a;
        r.xg_home[t - 1] = xg_h;
        r.xg_away[t - 1] = xg_a;

        const int diff = goals_h - goals_a;
        bool open = t > closed_until;
        if (t >= config.closure_decided_from && std::abs(diff) >= config.closure_decided_lead)
            open = false;
        r.open[t - 1] = open ? 1 : 0;

        const double remaining =
            static_cast<double>(play_minutes_after(t)) / static_cast<double>(total_play);
        const OutcomeProbs p = outcome_probs(lambda_home, lambda_away, remaining, diff);
        // Quoted implied probabilities stay inside (0,1) even for decided
        // matches, mirroring bookmakers' minimum odds.
        auto quote = [&](double prob) {
            return std::min(0.9995, std::max(1e-6, prob * config.overround));
        };
        r.improb_home[t - 1] = quote(p.home);
        r.improb_away[t - 1] = quote(p.away);
        r.improb_draw[t - 1] = quote(p.draw);

        if (open) {
            // Draw stakes are plumbing for schema realism; the models ignore them.
            if (rng.bernoulli(0.7))
                r.stake_draw[t - 1] =
                    config.draw_stake_scale * std::exp(-0.5 + 0.8 * rng.normal());
        }
    }

    // Stake pass per perspective, through the exact ingestion covariates.
    auto [home_series, away_series] = build_team_series(r, spec);
    home_series.stake_avg_team = setup.sentiment[hi];
    home_series.stake_avg_set = true;
    away_series.stake_avg_team = setup.sentiment[ai];
    away_series.stake_avg_set = true;

    for (int side = 0; side < 2; ++side) {
        const TeamMatchSeries& series = side == 0 ? home_series : away_series;
        TruthSeries& truth = side == 0 ? sm.home : sm.away;
        std::vector<double>& stakes = side == 0 ? r.stake_home : r.stake_away;

        const PredictorPaths paths = compute_predictors(series, config.theta, spec);
        truth.nu.assign(paths.nu.data(), paths.nu.data() + T);
        truth.pi.assign(paths.pi.data(), paths.pi.data() + T);
        truth.shift.assign(paths.shift.data(), paths.shift.data() + T);
        truth.injected.assign(T, 0);

        truth.s = simulate_latent_path(config.theta, T, truth.shift, rng);
        for (int t = 0; t < T; ++t) {
            double y = 0.0;
            if (r.open[t] && !rng.bernoulli(truth.pi[t]))
                y = std::exp(truth.nu[t] + truth.s[t] + config.theta.sigma * rng.normal());
            stakes[t] = y;
        }
        truth.y_pre = stakes;
    }

    if (setup.injected[match_index]) {
        Rng inj_rng = Rng::stream(config.seed, "inject", static_cast<std::uint64_t>(match_index));
        AnomalyInjection inj;
        inj.target_home = inj_rng.bernoulli(0.5);
        inj.duration = config.inject_duration;
        inj.factor = config.inject_factor;
        inj.pre_goal = config.inject_pre_goal;
        TruthSeries& truth = inj.target_home ? sm.home : sm.away;
        inject_anomaly(r, truth, inj, config.theta, inj_rng);
    }
    return sm;
}

SimOutput run_simulation(const SimConfig& config, bool parallel) {
    config.validate();
    const CorpusSetup setup = make_setup(config);
    const ModelSpec spec = generative_spec(config);
    SimOutput out;
    out.spec = spec;
    out.matches.resize(config.matches);
    std::string first_error;
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (int g = 0; g < config.matches; ++g) {
        try {
            out.matches[g] = simulate_one(config, setup, spec, g);
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw DataError(first_error);
    return out;
}

} // namespace

std::vector<double> simulate_latent_path(const ParameterSet& theta, int T,
                                         const std::vector<double>& shifts, Rng& rng) {
    std::vector<double> s(static_cast<std::size_t>(T));
    const double stat_sd = theta.sigma_s / std::sqrt(1.0 - theta.phi * theta.phi);
    s[0] = stat_sd * rng.normal();
    for (int t = 1; t < T; ++t) {
        const double d = shifts.empty() ? 0.0 : shifts[static_cast<std::size_t>(t)];
        s[t] = theta.phi * s[t - 1] + d + theta.sigma_s * rng.normal();
    }
    return s;
}

InjectionOutcome inject_anomaly(MatchRecord& record, TruthSeries& truth,
                                const AnomalyInjection& inj, const ParameterSet& theta,
                                Rng& rng) {
    if (!(inj.factor > 1.0)) throw DataError("injection factor must exceed 1");
    if (inj.duration < 1) throw DataError("injection duration must be at least 1");
    const int T = record.T;
    if (inj.duration > T) throw DataError("injection window exceeds the match length");

    auto window_open = [&](int start) {
        for (int t = start; t < start + inj.duration; ++t)
            if (!record.open[t - 1]) return false;
        return true;
    };
    std::vector<int> candidates;
    for (int start = 1; start + inj.duration - 1 <= T; ++start)
        if (window_open(start)) candidates.push_back(start);
    if (candidates.empty()) throw DataError("match " + record.match_id +
                                            ": no open window for injection");

    int desired = inj.start_minute;
    if (desired == 0) {
        if (inj.pre_goal) {
            // Window of minutes [g - duration, g - 1] just before the first
            // goal that leaves room for it.
            int prev_goals = 0;
            for (int t = 0; t < T && desired == 0; ++t) {
                const int goals = record.goals_home[t] + record.goals_away[t];
                if (goals > prev_goals && (t + 1) - inj.duration >= 1)
                    desired = (t + 1) - inj.duration;
                prev_goals = goals;
            }
        }
        if (desired == 0)
            desired = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
    }

    InjectionOutcome outcome;
    int start = desired;
    if (start < 1 || start > T - inj.duration + 1 || !window_open(start)) {
        // Shift to the nearest fully open span.
        int best = candidates.front();
        for (int c : candidates)
            if (std::abs(c - desired) < std::abs(best - desired)) best = c;
        start = best;
        outcome.shifted = true;
    }

    std::vector<double>& stakes = inj.target_home ? record.stake_home : record.stake_away;
    for (int t = start; t < start + inj.duration; ++t) {
        double y = stakes[t - 1];
        if (y == 0.0) {
            // The window must carry visible volume: draw the suppressed
            // positive branch, then scale it like the rest.
            y = std::exp(truth.nu[t - 1] + truth.s[t - 1] + theta.sigma * rng.normal());
        }
        stakes[t - 1] = y * inj.factor;
        truth.injected[t - 1] = 1;
        outcome.minutes.push_back(t);
    }
    return outcome;
}

SimOutput simulate_corpus(const SimConfig& config) { return run_simulation(config, true); }
SimOutput simulate_corpus_serial(const SimConfig& config) { return run_simulation(config, false); }

void write_truth(const std::string& dir, const SimOutput& out, const SimConfig& config) {
    CsvWriter w(dir + "/truth.csv",
                {"match_id", "team_id", "minute", "s", "nu", "pi", "shift", "injected", "y_pre"});
    for (const auto& sm : out.matches) {
        for (int side = 0; side < 2; ++side) {
            const TruthSeries& truth = side == 0 ? sm.home : sm.away;
            const std::string& team = side == 0 ? sm.record.home_team : sm.record.away_team;
            for (int t = 0; t < sm.record.T; ++t) {
                w.field(sm.record.match_id)
                    .field(team)
                    .field(static_cast<long long>(t + 1))
                    .field(truth.s[t])
                    .field(truth.nu[t])
                    .field(truth.pi[t])
                    .field(truth.shift[t])
                    .field(static_cast<long long>(truth.injected[t]))
                    .field(truth.y_pre[t]);
                w.end_row();
            }
        }
    }
    w.close();

    KvMap kv;
    kv.set("variant", variant_to_string(config.variant));
    kv.set("seed", static_cast<long long>(config.seed));
    kv.set("theta.phi", config.theta.phi);
    kv.set("theta.sigma_s", config.theta.sigma_s);
    kv.set("theta.sigma", config.theta.sigma);
    ModelSpec spec;
    spec.variant = config.variant;
    if (spec.uses_pi_const()) kv.set("theta.pi", config.theta.pi_const);
    for (int i = 0; i < spec.beta_arity(); ++i)
        kv.set("theta.beta" + std::to_string(i), config.theta.beta[i]);
    for (int i = 0; i < spec.omega_arity(); ++i)
        kv.set("theta.omega" + std::to_string(i + 1), config.theta.omega[i]);
    for (int i = 0; i < spec.alpha_arity(); ++i)
        kv.set("theta.alpha" + std::to_string(i), config.theta.alpha[i]);
    kv.write_file(dir + "/truth.kv");
}

std::map<std::pair<std::string, std::string>, TruthMask> load_truth_masks(
    const std::string& truth_csv) {
    std::map<std::pair<std::string, std::string>, TruthMask> masks;
    CsvReader reader(truth_csv);
    while (reader.next_row()) {
        const auto key = std::make_pair(reader.raw("match_id"), reader.raw("team_id"));
        auto& mask = masks[key];
        const long long minute = reader.integer("minute");
        if (static_cast<long long>(mask.injected.size()) < minute)
            mask.injected.resize(static_cast<std::size_t>(minute), 0);
        mask.injected[static_cast<std::size_t>(minute - 1)] =
            reader.integer("injected") != 0 ? 1 : 0;
    }
    return masks;
}

} // namespace stakewatch
