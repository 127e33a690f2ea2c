#pragma once

#include "elab/config.hpp"

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace elab {

enum ExitCode : int {
    exit_ok = 0,
    exit_suite_failure = 1,
    exit_config_error = 2,
    exit_non_contractive = 3,
    exit_fredholm = 4,
    exit_solver_failure = 5,
};

/// Exit code for an exception escaping a run.
int exit_code_for(const std::exception& e);

/// One-row result of a single command, as merged into sweep tables.
struct Summary {
    std::vector<std::string> header;
    std::vector<std::string> values;
};

/// Column names of the summary row of a sweepable command.
std::vector<std::string> summary_header(Command command);

/// Executes the command named in the config, writes `<prefix>_*.csv` files
/// and returns the exit code. Human-readable progress goes to `log`.
int run(const RunConfig& config, std::ostream& log);

/// Runs a sweepable command without writing files.
Summary run_summary(const RunConfig& config, std::ostream& log);

/// Comment block heading every CSV file: version, command, timestamp, the
/// effective config, and any extra `name = value` lines.
void write_provenance(std::ostream& out, const RunConfig& config,
                      const std::vector<std::pair<std::string, std::string>>& extra = {});

}  // namespace elab
