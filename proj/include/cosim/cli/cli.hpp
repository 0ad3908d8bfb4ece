#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cosim::cli {

enum exit_code : int {
    ok = 0,
    failed = 1,       // diagnostics reported or a criterion failed
    execution = 2,
    usage = 64,
};

enum class subcommand { validate, compile, run, assess, workflow };

struct cli_config {
    subcommand command = subcommand::validate;
    std::vector<std::filesystem::path> inputs;
    std::optional<std::filesystem::path> ri;
    std::optional<std::filesystem::path> plan;
    std::optional<std::filesystem::path> out;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::optional<std::uint64_t> seed;
    /// workflow: "proceed" or "loop_back"; empty only prints the state.
    std::string event;
};

int dispatch(const cli_config& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (without the program name) and dispatches. Usage errors print
/// the synopsis to `err` and return 64.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies COSIM_LOG (error, warn, info, debug) to the default logger, which
/// writes to stderr. Unset or unknown values mean warn.
void configure_logging();

} // namespace cosim::cli
