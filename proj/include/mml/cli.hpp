#ifndef MML_CLI_HPP
#define MML_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mml::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_data = 2,
    exit_numeric = 3,
};

// Runs `mml-lab <grai|popann|adc> <verb> [flags]`; args exclude the program
// name. Messages go to `out`, diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace mml::cli

#endif
