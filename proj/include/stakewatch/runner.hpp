#pragma once

#include <optional>
#include <string>

#include "stakewatch/kvconfig.hpp"

namespace stakewatch {

// Merged run settings: config file keys overridden by CLI flags. Every
// subcommand writes a manifest (config, input and output digests) so a run
// is reproducible from its output directory alone.
struct RunConfig {
    std::string config_path;  // optional for some subcommands
    std::string out_dir;
    KvMap kv;  // merged view

    std::optional<std::uint64_t> seed;
    std::optional<std::string> model;
    std::optional<int> grid_m;
    std::optional<double> grid_bound;
    std::optional<double> threshold;
    int threads = 0;  // 0 = library default
};

int cmd_simulate(const RunConfig& rc);
int cmd_fit(const RunConfig& rc);
int cmd_score(const RunConfig& rc);
int cmd_eval(const RunConfig& rc);

} // namespace stakewatch
