#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"

namespace extremal::app {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kInputError = 2 };

struct CommandResult {
    int exit_code = kSuccess;
    nlohmann::json report;
};

// Each command prints a human-readable summary to `text` and, when `out_dir` is
// set, writes <verb>.json (plus data files) there.
CommandResult run_classify(const RunConfig& config, std::ostream& text);
CommandResult run_integrate(const RunConfig& config, std::ostream& text,
                            const std::optional<std::filesystem::path>& out_dir);
CommandResult run_sphere(const RunConfig& config, std::ostream& text,
                         const std::optional<std::filesystem::path>& out_dir);
CommandResult run_validate(const RunConfig& config, std::ostream& text);
CommandResult run_oracle(const RunConfig& config, std::ostream& text);

// Dispatches on the verb, writes <out_dir>/<verb>.json and maps library errors to
// exit codes. Throws ConfigError for an unknown verb.
int run_command(const std::string& verb, const RunConfig& config, std::ostream& text, std::ostream& err,
                const std::optional<std::filesystem::path>& out_dir);

}  // namespace extremal::app
