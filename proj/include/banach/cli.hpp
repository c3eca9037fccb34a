#pragma once

// Batch commands behind the banachlab executable. A RunConfig comes from one
// JSON file (plus --seed/--grid/--out overrides) and fully determines the
// tables a command writes; only the summary header carries a timestamp.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "banach/serialize.hpp"
#include "banach/suites.hpp"

namespace banach::cli {

enum class Command { Modulus, Suite, DualCheck, Criterion };

std::string_view command_name(Command c) noexcept;
/// ConfigError for anything but modulus, suite, dual-check, criterion.
Command parse_command(std::string_view name);

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitConfig = 2;

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputEnv = "BANACHLAB_OUT";

struct CriterionConfig {
    /// induced, sup_over_atoms, mixed_sum or mixed_max.
    std::string norm = "induced";
    /// Second exponent of the mixed norms; p + 1 when absent.
    std::optional<double> p2;
    std::size_t probes = 8;
    /// Whether the norm is expected to come from a pointwise norm; defaults
    /// to norm == "induced".
    std::optional<bool> expect_induced;
};

struct RunConfig {
    Command command = Command::Suite;
    std::uint64_t seed = 1;
    std::vector<double> exponents{1.5, 2.0, 3.0};
    std::vector<double> epsilons;  ///< defaults to 0.1:2:0.1
    SuiteBudget budget;
    InstanceRecipe recipe;
    /// Explicit instances; when non-empty they replace the recipe.
    std::vector<BundleRef> instances;
    std::vector<std::string> suites;
    std::optional<NormSpec> norm;
    BundleRef bundle;
    std::vector<Section> sections;
    std::vector<DualSection> dual_sections;
    std::size_t samples = 100;
    CriterionConfig criterion;
    std::string out = "banachlab-out";
};

/// ConfigError naming the key path (and line/column for syntax errors).
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

/// "a:b:step" on the epsilon grid.
std::vector<double> parse_grid(std::string_view text);

/// Canonical JSON of the resolved configuration; parse_config(to_json(c))
/// reproduces the run.
Json to_json(const RunConfig& config);
std::string config_digest(const RunConfig& config);

/// Suite names to run, with "all" expanded.
std::vector<std::string> resolve_suites(const RunConfig& config);

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
    std::vector<TheoremReport> reports;
};

RunResult cmd_modulus(const RunConfig& config, const std::filesystem::path& out);
RunResult cmd_suite(const RunConfig& config, const std::filesystem::path& out);
RunResult cmd_dual_check(const RunConfig& config, const std::filesystem::path& out);
RunResult cmd_criterion(const RunConfig& config, const std::filesystem::path& out);

/// Dispatch on config.command.
RunResult run(const RunConfig& config, const std::filesystem::path& out);

/// Column header and rows of the check tables written by suite, dual-check
/// and criterion.
std::string checks_csv_header();
std::string checks_csv_row(const CheckRow& row, std::uint64_t seed);

}  // namespace banach::cli
