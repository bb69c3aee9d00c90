#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "crres/integrate.hpp"

namespace crres {

struct ManifestError : std::runtime_error {
    int line, col;
    ManifestError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(col_) + ")"),
          line(line_), col(col_) {}
};

struct RunOptions {
    std::optional<double> tolerance; ///< overrides manifest tolerances
    std::optional<int> order;        ///< overrides quadrature order
    bool parallel = false;           ///< run independent tasks concurrently
};

struct TaskResult {
    std::string label;
    std::string kind;
    bool pass = false;
    std::string detail_json; ///< serialized task-specific payload
};

struct RunResult {
    std::vector<TaskResult> tasks;
    bool all_pass() const;
    int exit_code() const { return all_pass() ? 0 : 1; }
    std::string to_json(bool with_timestamp = true) const;
    std::string text_report() const;
};

/// Parses and executes a manifest. Throws ManifestError (exit code 2
/// situations) on syntax or resolution problems.
RunResult run_manifest_text(const std::string& text, const RunOptions& opt = {});
RunResult run_manifest_file(const std::string& path, const RunOptions& opt = {});

} // namespace crres
