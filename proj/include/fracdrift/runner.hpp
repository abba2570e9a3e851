#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracdrift/config.hpp"
#include "json.hpp"

namespace fracdrift {

inline constexpr const char* kManifestSchema = "1";

/// A suite-internal assertion. Failures set exit status 1.
struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunReport {
    int status = 0;  // 0 all checks passed, 1 otherwise
    std::vector<Check> checks;
    nlohmann::ordered_json manifest;
};

/// Runs one suite into `out_dir` and writes manifest.json there. Inputs are
/// checked before anything is written: ConfigError for a mismatched prior
/// run, or an output directory that is non-empty and holds no manifest. An
/// existing manifest's files are removed before the run.
RunReport run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// Command-line entry: 0 success, 1 failed assertion or runtime error,
/// 2 invalid configuration (nothing written).
int run_cli(Experiment experiment, const std::filesystem::path& config, const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed, std::ostream& log, std::ostream& err);

}  // namespace fracdrift
