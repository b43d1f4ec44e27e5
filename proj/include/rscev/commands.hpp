#ifndef RSCEV_COMMANDS_HPP
#define RSCEV_COMMANDS_HPP

// Subcommands behind the `engine` executable. Each writes CSV to `out`,
// diagnostics to `err`, and returns a process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "rscev/config.hpp"

namespace rscev::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kNumericalFailure = 2,
  kThresholdExceeded = 3,
};

inline constexpr std::string_view kMomentHeader = "tau,state,R,analytic_value";
inline constexpr std::string_view kSimulateHeader = "t,state,R_hat";
inline constexpr std::string_view kCompareHeader = "tau,analytic,mc_mean,mc_stderr,rel_diff_pct";
inline constexpr std::string_view kPriceHeader = "K,price,last_term,cancellation_ratio";

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
};

int cmd_moment(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, const Overrides& ov, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& cfg, const Overrides& ov, std::ostream& out, std::ostream& err);
int cmd_price(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<std::string> out_path;
  Overrides overrides;
};

/// Loads the config, checks it matches the subcommand, and dispatches. CSV
/// goes to --out, else the config's output path, else `default_out`.
int run(const Invocation& inv, std::ostream& default_out, std::ostream& err);

}  // namespace rscev::cli

#endif  // RSCEV_COMMANDS_HPP
