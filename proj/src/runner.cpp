#include "stakewatch/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "stakewatch/csv.hpp"
#include "stakewatch/errors.hpp"
#include "stakewatch/fit.hpp"
#include "stakewatch/match_data.hpp"
#include "stakewatch/scoring.hpp"
#include "stakewatch/simulator.hpp"

namespace stakewatch {

namespace {

constexpr const char* kVersion = "stakewatch 1.0.0";

std::uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for digest: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    return h;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory: " + dir);
}

class ManifestBuilder {
public:
    ManifestBuilder(const std::string& subcommand, const RunConfig& rc) : rc_(rc) {
        kv_.set("version", std::string(kVersion));
        kv_.set("subcommand", subcommand);
        for (const auto& [key, value] : rc.kv.entries()) kv_.set("config." + key, value);
        kv_.set("threads", static_cast<long long>(rc.threads));
    }
    void input(const std::string& name, const std::string& path) {
        kv_.set("input." + name + ".path", path);
        kv_.set("input." + name + ".digest", static_cast<long long>(file_digest(path)));
    }
    void output(const std::string& name, const std::string& path) {
        outputs_.emplace_back(name, path);
    }
    void write() {
        for (const auto& [name, path] : outputs_)
            kv_.set("output." + name + ".digest", static_cast<long long>(file_digest(path)));
        kv_.write_file(rc_.out_dir + "/manifest.kv");
    }

private:
    const RunConfig& rc_;
    KvMap kv_;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

const std::set<std::string> kSimulateKeys = {
    "matches", "minutes_per_half", "halftime_minutes", "teams", "seed", "model",
    "goal_rate", "redcard_rate", "closure.event_minutes", "closure.decided_lead",
    "closure.decided_from", "overround", "sentiment.mu", "sentiment.sigma",
    "strength.sigma", "home_advantage", "shots.rate", "shots.xg_lo", "shots.xg_hi",
    "shots.goal_xg_lo", "shots.goal_xg_hi", "draw.scale", "inject.count",
    "inject.factor", "inject.duration", "inject.pre_goal",
    "theta.phi", "theta.sigma_s", "theta.sigma", "theta.pi",
    "theta.beta0", "theta.beta1", "theta.beta2", "theta.beta3", "theta.beta4",
    "theta.beta5", "theta.beta6", "theta.beta7", "theta.beta8",
    "theta.omega1", "theta.omega2", "theta.omega3", "theta.omega4", "theta.omega5",
    "theta.alpha0", "theta.alpha1", "theta.alpha2", "theta.alpha3", "theta.alpha4",
    "theta.alpha5",
};

const std::set<std::string> kFitKeys = {
    "corpus", "model", "seed", "grid.m", "grid.bound", "grid.truncation_warn",
    "fit.max_iter", "fit.multistart", "fit.ci", "fit.verbose",
};

const std::set<std::string> kScoreKeys = {
    "corpus", "model_dir", "model", "threshold", "seed",
};

const std::set<std::string> kEvalKeys = {
    "minutes", "matches", "truth", "top_share",
};

} // namespace

int cmd_simulate(const RunConfig& rc) {
    rc.kv.validate(kSimulateKeys);
    SimConfig config = sim_config_from_kv(rc.kv);
    if (rc.seed) config.seed = *rc.seed;
    ensure_out_dir(rc.out_dir);

    const SimOutput out = simulate_corpus(config);
    std::vector<MatchRecord> records;
    records.reserve(out.matches.size());
    for (const auto& sm : out.matches) records.push_back(sm.record);
    const std::string corpus_path = rc.out_dir + "/corpus.csv";
    write_match_records(corpus_path, records);
    write_truth(rc.out_dir, out, config);

    ManifestBuilder manifest("simulate", rc);
    manifest.output("corpus", corpus_path);
    manifest.output("truth", rc.out_dir + "/truth.csv");
    manifest.output("truth_config", rc.out_dir + "/truth.kv");
    manifest.write();

    long long series_minutes = 0;
    for (const auto& r : records) series_minutes += 2LL * r.T;
    std::cout << "simulated " << records.size() << " matches (" << series_minutes
              << " series-minute rows) -> " << corpus_path << "\n";
    return kExitOk;
}

int cmd_fit(const RunConfig& rc) {
    rc.kv.validate(kFitKeys);
    const std::string corpus_path = rc.kv.get_string("corpus");
    ModelSpec spec;
    spec.variant = variant_from_string(rc.kv.get_string("model", "baseline"));
    spec.grid_m = static_cast<int>(rc.kv.get_int("grid.m", spec.grid_m));
    spec.grid_bound = rc.kv.get_double("grid.bound", spec.grid_bound);
    spec.truncation_warn = rc.kv.get_double("grid.truncation_warn", spec.truncation_warn);

    FitOptions options;
    options.max_iter = static_cast<int>(rc.kv.get_int("fit.max_iter", options.max_iter));
    options.multistart = rc.kv.get_bool("fit.multistart", options.multistart);
    options.compute_ci = rc.kv.get_bool("fit.ci", options.compute_ci);
    options.verbose = rc.kv.get_bool("fit.verbose", options.verbose);
    if (rc.seed) options.multistart_seed = *rc.seed;

    ensure_out_dir(rc.out_dir);
    const auto records = load_match_records(corpus_path);
    Corpus corpus = corpus_from_records(records, spec);
    std::cout << "fitting " << variant_to_string(spec.variant) << " model to "
              << corpus.series.size() << " series (grid m=" << spec.grid_m
              << ", bound=" << spec.grid_bound << ")\n";
    const FitResult result = fit(corpus, spec, options);
    write_fit_outputs(result, rc.out_dir);

    if (result.diag.stationary_truncation > result.spec.truncation_warn)
        std::cerr << "warning: stationary-weighted transition truncation "
                  << format_double(result.diag.stationary_truncation)
                  << " exceeds grid.truncation_warn "
                  << format_double(result.spec.truncation_warn)
                  << "; consider a larger grid.bound\n";

    ManifestBuilder manifest("fit", rc);
    manifest.input("corpus", corpus_path);
    manifest.output("params", rc.out_dir + "/params.csv");
    manifest.output("teams", rc.out_dir + "/teams.csv");
    manifest.output("model", rc.out_dir + "/model.kv");
    manifest.output("report", rc.out_dir + "/report.txt");
    manifest.write();

    std::cout << "loglik " << format_double(result.loglik) << "  AIC "
              << format_double(result.aic) << "  ("
              << (result.diag.converged ? "converged" : "NOT converged") << ", "
              << result.diag.iterations << " iterations)\n";
    if (!result.diag.converged) {
        std::cerr << "fit did not converge: " << result.diag.stop_reason << "\n";
        return kExitNonConverged;
    }
    return kExitOk;
}

int cmd_score(const RunConfig& rc) {
    rc.kv.validate(kScoreKeys);
    const std::string corpus_path = rc.kv.get_string("corpus");
    const std::string model_dir = rc.kv.get_string("model_dir");

    const Model model = load_model(model_dir);
    if (rc.kv.has("model")) {
        const Variant expected = variant_from_string(rc.kv.get_string("model"));
        if (expected != model.spec.variant)
            throw ConfigError("model variant mismatch: fitted model is '" +
                              variant_to_string(model.spec.variant) + "', requested '" +
                              variant_to_string(expected) + "'");
    }

    ScorePolicy policy;
    policy.threshold = rc.kv.get_double("threshold", policy.threshold);
    policy.seed = static_cast<std::uint64_t>(rc.kv.get_int("seed", 0));

    ensure_out_dir(rc.out_dir);
    const auto records = load_match_records(corpus_path);
    Corpus corpus = corpus_from_records(records, model.spec);
    prepare_for_scoring(corpus, model.team_avg);

    const auto scores = score_corpus(corpus, model, policy);
    const auto summaries = match_report(scores, policy);
    write_minute_scores(rc.out_dir + "/minutes.csv", scores);
    write_match_summaries(rc.out_dir + "/matches.csv", summaries);

    KvMap header;
    header.set("threshold", policy.threshold);
    header.set("seed", static_cast<long long>(policy.seed));
    header.set("model_dir", model_dir);
    header.set("variant", variant_to_string(model.spec.variant));
    header.write_file(rc.out_dir + "/report.kv");

    ManifestBuilder manifest("score", rc);
    manifest.input("corpus", corpus_path);
    manifest.input("model", model_dir + "/model.kv");
    manifest.input("params", model_dir + "/params.csv");
    manifest.output("minutes", rc.out_dir + "/minutes.csv");
    manifest.output("matches", rc.out_dir + "/matches.csv");
    manifest.output("report", rc.out_dir + "/report.kv");
    manifest.write();

    long long flags = 0;
    for (const auto& s : scores)
        for (const auto& ms : s.minutes) flags += ms.flagged ? 1 : 0;
    std::cout << "scored " << corpus.series.size() << " series, " << flags
              << " flagged minutes at threshold " << format_double(policy.threshold) << "\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& rc) {
    rc.kv.validate(kEvalKeys);
    const std::string minutes_path = rc.kv.get_string("minutes");
    const std::string matches_path = rc.kv.get_string("matches");
    const std::string truth_path = rc.kv.get_string("truth");
    const double top_share = rc.kv.get_double("top_share", 0.05);

    ensure_out_dir(rc.out_dir);
    const auto scores = load_minute_scores(minutes_path);
    const auto summaries = load_match_summaries(matches_path);
    const auto masks = load_truth_masks(truth_path);
    const EvalMetrics metrics = evaluate_detection(scores, summaries, masks, top_share);
    write_eval_metrics(rc.out_dir + "/metrics.csv", metrics);

    ManifestBuilder manifest("eval", rc);
    manifest.input("minutes", minutes_path);
    manifest.input("matches", matches_path);
    manifest.input("truth", truth_path);
    manifest.output("metrics", rc.out_dir + "/metrics.csv");
    manifest.write();

    auto show = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string("absent");
    };
    std::cout << "minute precision " << show(metrics.minute_precision) << ", recall "
              << show(metrics.minute_recall) << "; match precision "
              << show(metrics.match_precision) << ", recall " << show(metrics.match_recall)
              << "; median injected rank " << show(metrics.median_rank) << " of "
              << metrics.n_matches << "\n";
    return kExitOk;
}

} // namespace stakewatch
