// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: search, experiment, inspect, synth, stats.
//
// Settings come from, in increasing precedence: defaults, the --config file
// (TOML or INI, flat keys), EVOFORGE_<KEY> environment variables, and flags.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evoforge::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kInputError = 3,
    kNumericalFailure = 4,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Environment variable consulted for a config key, e.g. bp_epochs -> EVOFORGE_BP_EPOCHS.
std::string env_name(const std::string &key);

} // namespace evoforge::cli
