#include "stakewatch/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "stakewatch/csv.hpp"
#include "stakewatch/emission.hpp"
#include "stakewatch/errors.hpp"
#include "stakewatch/mathutil.hpp"
#include "stakewatch/simulator.hpp"
#include "stakewatch/state_grid.hpp"

namespace stakewatch {

namespace {

double zero_atom_draw(const ScorePolicy& policy, const std::string& match_id,
                      const std::string& team_id, int minute, double atom) {
    Rng rng = Rng::stream(policy.seed, match_id + "/" + team_id,
                          static_cast<std::uint64_t>(minute));
    return atom * rng.uniform01();
}

// One-step filter over a series; shared by predictive_cdf and score_series.
class ScoringFilter {
public:
    ScoringFilter(const TeamMatchSeries& series, const Model& model, const StateGrid& grid)
        : series_(series),
          model_(model),
          grid_(grid),
          kernel_(grid, model.theta),
          paths_(compute_predictors(series, model.theta, model.spec)),
          alpha_(initial_distribution(grid, model.theta)) {}

    // Advances to minute t (1-based) and exposes the normalized prediction
    // weights; must be called with t increasing from 1.
    const Eigen::VectorXd& predict(int t) {
        if (t == 1) {
            weights_ = alpha_;
        } else {
            kernel_.apply_transposed(paths_.shift[t - 1], alpha_, weights_, scratch_);
            const double mass = weights_.sum();
            if (!(mass > 0.0))
                throw DataError("series " + series_.match_id + "/" + series_.team_id +
                                ": prediction mass vanished at minute " + std::to_string(t));
            weights_ /= mass;
        }
        return weights_;
    }

    double cdf_at(int t, double y) const {
        if (y < 0.0) return 0.0;
        const double pi = paths_.pi[t - 1];
        if (y == 0.0) return pi;
        const double ly = std::log(y);
        const double nu = paths_.nu[t - 1];
        double acc = 0.0;
        for (int i = 0; i < grid_.m; ++i)
            acc += weights_[i] * norm_cdf((ly - nu - grid_.midpoints[i]) / model_.theta.sigma);
        return pi + (1.0 - pi) * acc;
    }

    double predictive_mean_log(int t) const {
        return paths_.nu[t - 1] + weights_.dot(grid_.midpoints);
    }

    double zero_prob_at(int t) const { return paths_.pi[t - 1]; }

    // Conditions on the observed stake of minute t.
    void update(int t) {
        const double y = series_.y[t - 1];
        if (y == 0.0) {
            // Constant emission across states: the posterior equals the
            // prediction weights.
            alpha_ = weights_;
            return;
        }
        if (!series_.open[t - 1])
            throw DataError("series " + series_.match_id + "/" + series_.team_id +
                            ": positive stake on closed market at minute " + std::to_string(t));
        const double ly = std::log(y);
        const double inv_sigma = 1.0 / model_.theta.sigma;
        logem_ = -0.5 * ((grid_.midpoints.array() - (ly - paths_.nu[t - 1])) * inv_sigma).square();
        const double shift_max = logem_.maxCoeff();
        alpha_ = weights_.array() * (logem_.array() - shift_max).exp();
        const double mass = alpha_.sum();
        if (!(mass > 0.0))
            throw DataError("series " + series_.match_id + "/" + series_.team_id +
                            ": filter update vanished at minute " + std::to_string(t));
        alpha_ /= mass;
    }

private:
    const TeamMatchSeries& series_;
    const Model& model_;
    const StateGrid& grid_;
    TransitionKernel kernel_;
    PredictorPaths paths_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd weights_;
    Eigen::ArrayXd logem_;
    TransitionScratch scratch_;
};

} // namespace

double predictive_cdf(const TeamMatchSeries& series, int t, double y, const Model& model,
                      const StateGrid& grid) {
    if (t < 1 || t > series.T) throw DataError("predictive_cdf: minute out of range");
    ScoringFilter filter(series, model, grid);
    for (int u = 1; u < t; ++u) {
        filter.predict(u);
        filter.update(u);
    }
    filter.predict(t);
    return filter.cdf_at(t, y);
}

SeriesScores score_series(const TeamMatchSeries& series, const Model& model,
                          const StateGrid& grid, const ScorePolicy& policy) {
    SeriesScores out;
    out.match_id = series.match_id;
    out.team_id = series.team_id;
    out.minutes.resize(static_cast<std::size_t>(series.T));
    ScoringFilter filter(series, model, grid);
    for (int t = 1; t <= series.T; ++t) {
        MinuteScore& ms = out.minutes[static_cast<std::size_t>(t - 1)];
        ms.minute = t;
        ms.y = series.y[t - 1];
        filter.predict(t);
        if (series.open[t - 1]) {
            ms.scored = true;
            ms.pred_zero = filter.zero_prob_at(t);
            ms.pred_mean_log = filter.predictive_mean_log(t);
            double u;
            if (ms.y > 0.0) {
                u = filter.cdf_at(t, ms.y);
            } else {
                u = zero_atom_draw(policy, series.match_id, series.team_id, t, ms.pred_zero);
            }
            ms.pit = std::min(1.0, std::max(0.0, u));
            ms.flagged = ms.y > 0.0 && ms.pit > policy.threshold;
        }
        filter.update(t);
    }
    return out;
}

std::vector<double> pseudo_residuals(const TeamMatchSeries& series, const Model& model,
                                     const StateGrid& grid, const ScorePolicy& policy) {
    const SeriesScores scores = score_series(series, model, grid, policy);
    std::vector<double> out;
    out.reserve(scores.minutes.size());
    for (const auto& ms : scores.minutes)
        if (ms.scored) out.push_back(ms.pit);
    return out;
}

namespace {

std::vector<SeriesScores> score_all(const Corpus& corpus, const Model& model,
                                    const ScorePolicy& policy, bool parallel) {
    const StateGrid grid = build_grid(model.spec);
    const int n = static_cast<int>(corpus.series.size());
    std::vector<SeriesScores> out(static_cast<std::size_t>(n));
    std::string first_error;
#pragma omp parallel for schedule(dynamic, 2) if (parallel)
    for (int i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                score_series(corpus.series[static_cast<std::size_t>(i)], model, grid, policy);
        } catch (const std::exception& e) {
#pragma omp critical
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw DataError(first_error);
    return out;
}

} // namespace

std::vector<SeriesScores> score_corpus(const Corpus& corpus, const Model& model,
                                       const ScorePolicy& policy) {
    return score_all(corpus, model, policy, true);
}

std::vector<SeriesScores> score_corpus_serial(const Corpus& corpus, const Model& model,
                                              const ScorePolicy& policy) {
    return score_all(corpus, model, policy, false);
}

void flag_outliers(std::vector<SeriesScores>& scores, const ScorePolicy& policy) {
    for (auto& series : scores)
        for (auto& ms : series.minutes)
            ms.flagged = ms.scored && ms.y > 0.0 && ms.pit > policy.threshold;
}

namespace {

// Best short burst of large PITs within one series: contiguous runs of
// scored minutes, lengths 1..10, statistic sum(-log(1-u)) - length (zero
// mean per minute under a calibrated model).
WindowStat best_window(const SeriesScores& series) {
    WindowStat best;
    best.team_id = series.team_id;
    std::vector<std::pair<int, double>> scored;  // minute, -log(1-u)
    for (const auto& ms : series.minutes) {
        if (!ms.scored) continue;
        const double u = std::min(ms.pit, 1.0 - 1e-16);
        scored.push_back({ms.minute, -std::log1p(-u)});
    }
    const int n = static_cast<int>(scored.size());
    bool first = true;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int len = 1; len <= 10 && i + len <= n; ++len) {
            // Runs must be contiguous in match minutes, not only in the
            // scored subsequence.
            if (len > 1 && scored[i + len - 1].first != scored[i + len - 2].first + 1) break;
            acc += scored[i + len - 1].second;
            const double stat = acc - len;
            if (first || stat > best.stat) {
                best.stat = stat;
                best.start = scored[i].first;
                best.end = scored[i + len - 1].first;
                first = false;
            }
        }
    }
    return best;
}

} // namespace

std::vector<MatchSummary> match_report(const std::vector<SeriesScores>& scores,
                                       const ScorePolicy& policy) {
    (void)policy;
    std::map<std::string, MatchSummary> by_match;
    for (const auto& series : scores) {
        MatchSummary& m = by_match[series.match_id];
        m.match_id = series.match_id;
        for (const auto& ms : series.minutes) {
            if (!ms.scored) continue;
            ++m.n_scored;
            if (ms.flagged) ++m.flags;
            m.max_pit = std::max(m.max_pit, ms.pit);
        }
        const WindowStat w = best_window(series);
        if (m.window.team_id.empty() || w.stat > m.window.stat) m.window = w;
    }

    std::vector<MatchSummary> out;
    out.reserve(by_match.size());
    for (auto& [id, m] : by_match) {
        if (m.n_scored > 0) {
            // Sidak-corrected minimum tail p-value: 1 - (max u)^n.
            m.sidak_p = -std::expm1(static_cast<double>(m.n_scored) *
                                    std::log(std::min(m.max_pit, 1.0 - 1e-16)));
        }
        out.push_back(std::move(m));
    }
    std::sort(out.begin(), out.end(), [](const MatchSummary& a, const MatchSummary& b) {
        if (a.sidak_p != b.sidak_p) return a.sidak_p < b.sidak_p;
        return a.match_id < b.match_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
    return out;
}

void write_minute_scores(const std::string& path, const std::vector<SeriesScores>& scores) {
    CsvWriter w(path, {"match_id", "team_id", "minute", "scored", "y", "pit", "pred_zero",
                       "pred_mean_log", "flagged"});
    for (const auto& series : scores) {
        for (const auto& ms : series.minutes) {
            w.field(series.match_id)
                .field(series.team_id)
                .field(static_cast<long long>(ms.minute))
                .field(static_cast<long long>(ms.scored ? 1 : 0))
                .field(ms.y)
                .field(ms.pit)
                .field(ms.pred_zero)
                .field(ms.pred_mean_log)
                .field(static_cast<long long>(ms.flagged ? 1 : 0));
            w.end_row();
        }
    }
    w.close();
}

void write_match_summaries(const std::string& path, const std::vector<MatchSummary>& summaries) {
    CsvWriter w(path, {"rank", "match_id", "n_scored", "flags", "max_pit", "sidak_p",
                       "window_team", "window_start", "window_end", "window_stat"});
    for (const auto& m : summaries) {
        w.field(static_cast<long long>(m.rank))
            .field(m.match_id)
            .field(static_cast<long long>(m.n_scored))
            .field(static_cast<long long>(m.flags))
            .field(m.max_pit)
            .field(m.sidak_p)
            .field(m.window.team_id)
            .field(static_cast<long long>(m.window.start))
            .field(static_cast<long long>(m.window.end))
            .field(m.window.stat);
        w.end_row();
    }
    w.close();
}

std::vector<SeriesScores> load_minute_scores(const std::string& path) {
    std::vector<SeriesScores> out;
    CsvReader reader(path);
    while (reader.next_row()) {
        const std::string match_id = reader.raw("match_id");
        const std::string team_id = reader.raw("team_id");
        if (out.empty() || out.back().match_id != match_id || out.back().team_id != team_id) {
            out.emplace_back();
            out.back().match_id = match_id;
            out.back().team_id = team_id;
        }
        MinuteScore ms;
        ms.minute = static_cast<int>(reader.integer("minute"));
        ms.scored = reader.flag01("scored");
        ms.y = reader.number("y");
        ms.pit = reader.number("pit");
        ms.pred_zero = reader.number("pred_zero");
        ms.pred_mean_log = reader.number("pred_mean_log");
        ms.flagged = reader.flag01("flagged");
        out.back().minutes.push_back(ms);
    }
    return out;
}

std::vector<MatchSummary> load_match_summaries(const std::string& path) {
    std::vector<MatchSummary> out;
    CsvReader reader(path);
    while (reader.next_row()) {
        MatchSummary m;
        m.rank = static_cast<int>(reader.integer("rank"));
        m.match_id = reader.raw("match_id");
        m.n_scored = static_cast<int>(reader.integer("n_scored"));
        m.flags = static_cast<int>(reader.integer("flags"));
        m.max_pit = reader.number("max_pit");
        m.sidak_p = reader.number("sidak_p");
        m.window.team_id = reader.raw("window_team");
        m.window.start = static_cast<int>(reader.integer("window_start"));
        m.window.end = static_cast<int>(reader.integer("window_end"));
        m.window.stat = reader.number("window_stat");
        out.push_back(std::move(m));
    }
    return out;
}

EvalMetrics evaluate_detection(
    const std::vector<SeriesScores>& scores, const std::vector<MatchSummary>& summaries,
    const std::map<std::pair<std::string, std::string>, TruthMask>& masks,
    double top_share) {
    EvalMetrics metrics;

    long long tp = 0, fp = 0, fn = 0;
    std::map<std::string, bool> match_injected, match_flagged;
    for (const auto& series : scores) {
        const auto it = masks.find({series.match_id, series.team_id});
        auto& injected_flag = match_injected[series.match_id];
        auto& flagged_flag = match_flagged[series.match_id];
        for (const auto& ms : series.minutes) {
            const bool injected =
                it != masks.end() &&
                static_cast<int>(it->second.injected.size()) >= ms.minute &&
                it->second.injected[static_cast<std::size_t>(ms.minute - 1)] != 0;
            injected_flag = injected_flag || injected;
            flagged_flag = flagged_flag || ms.flagged;
            if (ms.flagged && injected) ++tp;
            if (ms.flagged && !injected) ++fp;
            if (!ms.flagged && injected) ++fn;
        }
    }
    if (tp + fp > 0)
        metrics.minute_precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0)
        metrics.minute_recall = static_cast<double>(tp) / static_cast<double>(tp + fn);

    long long mtp = 0, mfp = 0, mfn = 0;
    for (const auto& [id, injected] : match_injected) {
        const bool flagged = match_flagged[id];
        if (flagged && injected) ++mtp;
        if (flagged && !injected) ++mfp;
        if (!flagged && injected) ++mfn;
        if (injected) ++metrics.n_injected_matches;
    }
    metrics.n_matches = static_cast<long long>(match_injected.size());
    if (mtp + mfp > 0)
        metrics.match_precision = static_cast<double>(mtp) / static_cast<double>(mtp + mfp);
    if (mtp + mfn > 0)
        metrics.match_recall = static_cast<double>(mtp) / static_cast<double>(mtp + mfn);

    if (metrics.n_injected_matches > 0) {
        std::vector<int> ranks;
        for (const auto& m : summaries)
            if (match_injected.count(m.match_id) && match_injected.at(m.match_id))
                ranks.push_back(m.rank);
        std::sort(ranks.begin(), ranks.end());
        const std::size_t n = ranks.size();
        const double median =
            n % 2 ? ranks[n / 2] : 0.5 * (ranks[n / 2 - 1] + ranks[n / 2]);
        metrics.median_rank = median;
        metrics.median_rank_share = median / static_cast<double>(summaries.size());
        const double cutoff = top_share * static_cast<double>(summaries.size());
        long long in_top = 0;
        for (int r : ranks)
            if (r <= cutoff) ++in_top;
        metrics.injected_top_share =
            static_cast<double>(in_top) / static_cast<double>(n);
    }
    return metrics;
}

void write_eval_metrics(const std::string& path, const EvalMetrics& metrics) {
    CsvWriter w(path, {"metric", "value"});
    auto row = [&](const std::string& name, const std::optional<double>& v) {
        w.field(name);
        if (v)
            w.field(*v);
        else
            w.field(std::string());
        w.end_row();
    };
    row("minute_precision", metrics.minute_precision);
    row("minute_recall", metrics.minute_recall);
    row("match_precision", metrics.match_precision);
    row("match_recall", metrics.match_recall);
    row("median_rank", metrics.median_rank);
    row("median_rank_share", metrics.median_rank_share);
    row("injected_top_share", metrics.injected_top_share);
    w.field("n_injected_matches").field(metrics.n_injected_matches);
    w.end_row();
    w.field("n_matches").field(metrics.n_matches);
    w.end_row();
    w.close();
}

} // namespace stakewatch
