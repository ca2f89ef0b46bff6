#pragma once

#include <string>
#include <vector>

#include "remi/run_config.hpp"

namespace remi {

// Subcommand bodies; each writes its artifacts under config.output_dir and
// throws ConfigError / DataError / NumericError on failure.
void cmd_simulate(const RunConfig& config);
void cmd_run(const RunConfig& config);
void cmd_sweep(const RunConfig& config, const std::string& axis,
               const std::vector<double>& values_s);
void cmd_report(const std::string& report_csv_path);

// Full argument parsing and dispatch. Exit codes: 0 success, 1 config error,
// 2 data error, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

} // namespace remi
