#pragma once

#include "stiffhs/scenario.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace stiffhs {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Per-command knobs that are not part of the model.
struct CommandParams {
    // barriers
    double wt_radius = 1.0;
    double wt_horizon = 1.0;
    double sub_radius = 0.5;
    double decay_M = 2.0;
    std::optional<double> decay_m; // default: largest m of the scenario
    int samples = 10000;
    // contraction: second run starts from scale * rho_0
    double contraction_scale = 0.99;
    // perimeter: level of {p > eps}; default the support threshold
    std::optional<double> perimeter_eps;
    // sweep
    std::optional<double> sweep_margin;
    std::optional<double> sweep_eval_time;
};

struct ParsedScenario {
    Scenario scenario;
    CommandParams params;
    std::vector<std::string> warnings;
    std::string canonical; // sorted-key compact JSON of the effective input
    std::string hash;      // SHA-256 of `canonical`, lowercase hex
};

/// Parses a JSON config (// comments allowed). Unknown keys and every violated
/// constraint are reported together as one ConfigError. `m_list` overrides the file.
ParsedScenario parse_scenario_text(std::string_view text, std::optional<std::vector<double>> m_list = {});
ParsedScenario parse_scenario(const std::filesystem::path& path, std::optional<std::vector<double>> m_list = {});

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

struct ManifestEntry {
    std::string name;
    std::uintmax_t bytes = 0;
    std::string sha256;
};

struct RunManifest {
    std::string scenario_hash;
    std::string tool_version = kToolVersion;
    std::string command;
    std::string started;
    std::string finished;
    std::vector<std::string> warnings;
    std::vector<ManifestEntry> files;

    std::string to_json() const;
    /// Inventory of every regular file in `dir` except manifest.json, sorted by name.
    static std::vector<ManifestEntry> inventory(const std::filesystem::path& dir);
};

const std::vector<std::string>& commands();

struct DispatchOptions {
    int threads = 0;
};

enum ExitCode { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3 };

/// Runs `command` into <out_root>/<hash prefix>_<command>. On failure the run
/// directory is removed and the exit code tells validation (2) from numerics (3).
int dispatch(const std::string& command, const ParsedScenario& parsed, const std::filesystem::path& out_root,
             const DispatchOptions& options, std::ostream& log);

/// Directory dispatch writes into.
std::filesystem::path run_directory(const std::filesystem::path& out_root, const ParsedScenario& parsed,
                                    const std::string& command);

} // namespace stiffhs
