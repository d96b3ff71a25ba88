#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace olg::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kFailLow = 2,
    kFailHigh = 3,
    kConstructionViolation = 4,
};

struct Options {
    std::string command;  // simulate | eqset | construct | classify | preset
    std::optional<std::string> preset;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = ".";
    std::optional<std::size_t> horizon;
    std::optional<double> tol;
};

/// Parses argv and runs the command. Progress goes to `out`, diagnostics
/// to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int execute(const Options& opt, std::ostream& out, std::ostream& err);

}  // namespace olg::cli
