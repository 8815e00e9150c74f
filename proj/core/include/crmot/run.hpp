#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace crmot {

struct RunRequest {
  std::string subcommand;  // structure | slower | pump | mot | fit | sweep
  std::string scenario_path;
  std::string out_path;  // empty: write to the fallback stream
  std::optional<std::uint64_t> seed;
  bool summary = false;
  // fit can run without a scenario when both of these are given.
  std::string fit_model;
  std::string fit_data;
};

// Runs one subcommand end to end. CSV (or the fit record) goes to out_path,
// or to fallback_out when no path is set; --summary lines go to log.
// Throws ConfigError for bad input and NumericError for integration failures;
// the CLI maps those to exit codes 1 and 2.
void run_subcommand(const RunRequest& req, std::ostream& fallback_out,
                    std::ostream& log);

}  // namespace crmot
