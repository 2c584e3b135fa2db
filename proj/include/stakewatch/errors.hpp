#pragma once

#include <stdexcept>
#include <string>

namespace stakewatch {

// Exit-status taxonomy used by the CLI. 0 is success.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,        // unexpected internal failure
    kExitConfigError = 2,    // bad config file / flags
    kExitDataError = 3,      // schema or invariant violation in input data
    kExitNonConverged = 4,   // fit did not converge (partial result written)
    kExitIoError = 5,        // unreadable/unwritable paths
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace stakewatch
