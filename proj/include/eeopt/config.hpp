#ifndef EEOPT_CONFIG_HPP
#define EEOPT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eeopt/pipeline.hpp"

namespace eeopt::cli {

struct SweepConfig {
    std::string case_name = "case2";
    std::size_t x = 420;
    std::vector<std::vector<int>> candidates{{8, 8, 2}, {4, 4, 2}, {64, 32, 16, 8, 4, 2}};
};

/// Fully materialized, validated run configuration.
struct RunConfig {
    std::string preset = "desk";
    std::uint64_t master_seed = 1;
    std::filesystem::path out_dir = "out";
    int threads = 0;      // 0: leave the OpenMP default alone
    bool parallel = true; // OpenMP kernels when true, serial reference otherwise
    std::string case_name = "case2";
    pipeline::Case1Config case1;
    pipeline::DensityCaseConfig case2;
    pipeline::DensityCaseConfig case3;
    SweepConfig sweep;
    nlohmann::ordered_json raw;  // the merged document, for manifests

    Exec exec() const { return parallel ? Exec::OpenMP : Exec::Serial; }
};

/// Built-in defaults for a preset ("desk" or "paper").
nlohmann::ordered_json default_config_json(const std::string& preset);

/// Merge order: preset defaults <- config file <- --set overrides. Unknown
/// keys and malformed values are config errors; all parameter structs are
/// validated before anything runs.
RunConfig load_run_config(const std::optional<std::filesystem::path>& config_path,
                          const std::optional<std::string>& preset,
                          const std::optional<std::uint64_t>& seed_override,
                          const std::optional<std::string>& out_override,
                          const std::vector<std::string>& set_overrides);

}  // namespace eeopt::cli

#endif
