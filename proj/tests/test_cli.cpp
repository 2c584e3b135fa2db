// End-to-end CLI tests: the simulate -> fit -> score -> eval round trip,
// exit-status taxonomy and manifest determinism. Drives the real binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "stakewatch/csv.hpp"
#include "stakewatch/errors.hpp"
#include "stakewatch/kvconfig.hpp"
#include "stakewatch/match_data.hpp"
#include "stakewatch/rng.hpp"

using namespace stakewatch;
namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* bin = std::getenv("STAKEWATCH_BIN");
    REQUIRE(bin != nullptr);
    return bin;
}

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "sw_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_config(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
}

std::uint64_t digest_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(all);
}

} // namespace

TEST_CASE("pipeline round trip with determinism and exit codes") {
    const fs::path root = fresh_dir("pipeline");
    const fs::path simcfg = root / "sim.kv";
    write_config(simcfg,
                 "matches = 8\n"
                 "teams = 6\n"
                 "seed = 77\n"
                 "model = baseline\n"
                 "inject.count = 2\n"
                 "inject.factor = 9\n"
                 "inject.duration = 3\n");

    const std::string sim_out = (root / "sim").string();
    REQUIRE(run("simulate --config " + simcfg.string() + " --out " + sim_out) == 0);
    CHECK(fs::exists(sim_out + "/corpus.csv"));
    CHECK(fs::exists(sim_out + "/truth.csv"));
    CHECK(fs::exists(sim_out + "/manifest.kv"));

    SUBCASE("same config twice gives identical digests") {
        const std::string sim_out2 = (root / "sim2").string();
        REQUIRE(run("simulate --config " + simcfg.string() + " --out " + sim_out2) == 0);
        CHECK(digest_file(sim_out + "/corpus.csv") == digest_file(sim_out2 + "/corpus.csv"));
        CHECK(digest_file(sim_out + "/truth.csv") == digest_file(sim_out2 + "/truth.csv"));
        CHECK(digest_file(sim_out + "/manifest.kv") == digest_file(sim_out2 + "/manifest.kv"));
    }

    SUBCASE("fit, score, eval complete and reproduce") {
        const fs::path fitcfg = root / "fit.kv";
        write_config(fitcfg, "corpus = " + sim_out + "/corpus.csv\n" +
                                 "model = baseline\n"
                                 "grid.m = 40\n"
                                 "fit.ci = false\n");
        const std::string fit_out = (root / "fit").string();
        REQUIRE(run("fit --config " + fitcfg.string() + " --out " + fit_out) == 0);
        CHECK(fs::exists(fit_out + "/params.csv"));
        CHECK(fs::exists(fit_out + "/teams.csv"));
        CHECK(fs::exists(fit_out + "/model.kv"));
        CHECK(fs::exists(fit_out + "/report.txt"));

        // baseline parameter table has exactly 5 rows
        int rows = 0;
        CsvReader params(fit_out + "/params.csv");
        while (params.next_row()) ++rows;
        CHECK(rows == 5);

        const fs::path scorecfg = root / "score.kv";
        write_config(scorecfg, "corpus = " + sim_out + "/corpus.csv\n" +
                                   "model_dir = " + fit_out + "\n" +
                                   "threshold = 0.999\n"
                                   "seed = 5\n");
        const std::string score_out = (root / "score").string();
        REQUIRE(run("score --config " + scorecfg.string() + " --out " + score_out) == 0);
        CHECK(fs::exists(score_out + "/minutes.csv"));
        CHECK(fs::exists(score_out + "/matches.csv"));

        const std::string score_out2 = (root / "score2").string();
        REQUIRE(run("score --config " + scorecfg.string() + " --out " + score_out2) == 0);
        CHECK(digest_file(score_out + "/minutes.csv") ==
              digest_file(score_out2 + "/minutes.csv"));
        CHECK(digest_file(score_out + "/matches.csv") ==
              digest_file(score_out2 + "/matches.csv"));

        const fs::path evalcfg = root / "eval.kv";
        write_config(evalcfg, "minutes = " + score_out + "/minutes.csv\n" +
                                  "matches = " + score_out + "/matches.csv\n" +
                                  "truth = " + sim_out + "/truth.csv\n");
        const std::string eval_out = (root / "eval").string();
        REQUIRE(run("eval --config " + evalcfg.string() + " --out " + eval_out) == 0);
        CHECK(fs::exists(eval_out + "/metrics.csv"));

        // variant mismatch rejected as a config error
        const fs::path badscore = root / "badscore.kv";
        write_config(badscore, "corpus = " + sim_out + "/corpus.csv\n" +
                                   "model_dir = " + fit_out + "\n" +
                                   "model = full\n");
        CHECK(run("score --config " + badscore.string() + " --out " +
                  (root / "badscore").string()) == kExitConfigError);
    }
}

TEST_CASE("exit-status taxonomy") {
    const fs::path root = fresh_dir("exitcodes");

    SUBCASE("malformed config key -> config error, distinct from I/O failure") {
        const fs::path bad = root / "bad.kv";
        write_config(bad, "matches = 4\nnot_a_key = 1\n");
        CHECK(run("simulate --config " + bad.string() + " --out " + (root / "o1").string()) ==
              kExitConfigError);

        const fs::path good = root / "good.kv";
        write_config(good, "matches = 2\nmodel = baseline\n");
        const int io_code =
            run("simulate --config " + good.string() + " --out /proc/invalid/nope");
        CHECK(io_code == kExitIoError);
        CHECK(io_code != kExitConfigError);
    }

    SUBCASE("config syntax error") {
        const fs::path bad = root / "syntax.kv";
        write_config(bad, "matches 4\n");
        CHECK(run("simulate --config " + bad.string() + " --out " + (root / "o2").string()) ==
              kExitConfigError);
    }

    SUBCASE("schema violation in the corpus -> data error") {
        const fs::path cfg = root / "sim.kv";
        write_config(cfg, "matches = 2\nmodel = baseline\nseed = 3\n");
        const std::string sim_out = (root / "sim").string();
        REQUIRE(run("simulate --config " + cfg.string() + " --out " + sim_out) == 0);

        // corrupt one stake into a negative number
        const fs::path corpus = fs::path(sim_out) / "corpus.csv";
        std::ifstream in(corpus);
        std::string line, out;
        int n = 0;
        while (std::getline(in, line)) {
            if (++n == 5) {
                const auto pos = line.find(",1,");  // after the minute column
                line.replace(pos, 3, ",1,-9");
                const auto comma = line.find(',', pos + 4);
                line.erase(pos + 4, comma - pos - 4 + 1);
                // leave field counts intact: replace the open value instead
            }
            out += line + "\n";
        }
        const fs::path corrupted = root / "corrupted.csv";
        std::ofstream(corrupted) << out;

        const fs::path fitcfg = root / "fit.kv";
        write_config(fitcfg, "corpus = " + corrupted.string() + "\nmodel = baseline\n");
        const int code =
            run("fit --config " + fitcfg.string() + " --out " + (root / "fo").string());
        CHECK(code == kExitDataError);
    }

    SUBCASE("empty corpus rejected before optimization") {
        const fs::path empty = root / "empty.csv";
        {
            CsvWriter w(empty.string(), kCorpusCsvColumns);
            w.close();
        }
        const fs::path fitcfg = root / "fit_empty.kv";
        write_config(fitcfg, "corpus = " + empty.string() + "\nmodel = baseline\n");
        CHECK(run("fit --config " + fitcfg.string() + " --out " + (root / "fe").string()) ==
              kExitDataError);
    }

    SUBCASE("non-convergence exits 4 with the partial result written") {
        const fs::path cfg = root / "sim4.kv";
        write_config(cfg, "matches = 3\nmodel = baseline\nseed = 9\n");
        const std::string sim_out = (root / "sim4").string();
        REQUIRE(run("simulate --config " + cfg.string() + " --out " + sim_out) == 0);

        const fs::path fitcfg = root / "fit4.kv";
        write_config(fitcfg, "corpus = " + sim_out + "/corpus.csv\n" +
                                 "model = baseline\n"
                                 "grid.m = 30\n"
                                 "fit.max_iter = 2\n"
                                 "fit.ci = false\n");
        const std::string fit_out = (root / "fit4").string();
        CHECK(run("fit --config " + fitcfg.string() + " --out " + fit_out) ==
              kExitNonConverged);
        CHECK(fs::exists(fit_out + "/params.csv"));  // partial result still written
        const KvMap kv = KvMap::from_file(fit_out + "/model.kv");
        CHECK(kv.get_string("converged") == "false");
    }

    SUBCASE("unknown team at scoring time -> data error naming the team") {
        const fs::path cfg = root / "sim5.kv";
        write_config(cfg, "matches = 3\nteams = 4\nmodel = baseline\nseed = 11\n");
        const std::string sim_out = (root / "sim5").string();
        REQUIRE(run("simulate --config " + cfg.string() + " --out " + sim_out) == 0);
        const fs::path fitcfg = root / "fit5.kv";
        write_config(fitcfg, "corpus = " + sim_out + "/corpus.csv\n" +
                                 "model = baseline\ngrid.m = 30\nfit.ci = false\n");
        const std::string fit_out = (root / "fit5").string();
        REQUIRE(run("fit --config " + fitcfg.string() + " --out " + fit_out) <= 4);

        // corpus with an unseen team id
        const fs::path cfg2 = root / "sim6.kv";
        write_config(cfg2, "matches = 3\nteams = 12\nmodel = baseline\nseed = 999\n");
        const std::string sim_out2 = (root / "sim6").string();
        REQUIRE(run("simulate --config " + cfg2.string() + " --out " + sim_out2) == 0);
        const fs::path scorecfg = root / "score6.kv";
        write_config(scorecfg, "corpus = " + sim_out2 + "/corpus.csv\n" +
                                   "model_dir = " + fit_out + "\n");
        CHECK(run("score --config " + scorecfg.string() + " --out " +
                  (root / "so6").string()) == kExitDataError);
    }

    SUBCASE("eval without a truth sidecar is rejected") {
        const fs::path evalcfg = root / "eval_bad.kv";
        write_config(evalcfg,
                     "minutes = /nonexistent/minutes.csv\n"
                     "matches = /nonexistent/matches.csv\n"
                     "truth = /nonexistent/truth.csv\n");
        const int code =
            run("eval --config " + evalcfg.string() + " --out " + (root / "eo").string());
        CHECK(code == kExitIoError);
    }
}
