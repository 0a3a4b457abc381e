#pragma once

#include "goaltrack/agents.hpp"
#include "goaltrack/env.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace goaltrack {

struct ExperimentConfig {
    EnvConfig env;
    TrainConfig train;
    std::optional<std::uint64_t> train_seed; // training follows master_seed unless pinned
    PidConfig pid;
    int n_eval_runs = 1000;
    std::vector<double> d_th_sweep{1.0, 2.0, 3.0, 4.0, 5.0};
    std::string output_dir = "results";
    std::uint64_t master_seed = 1;

    void validate() const;
    /// Training configuration with the effective seed filled in.
    TrainConfig resolved_train() const;
};

/// Parses a configuration object. Absent keys keep their defaults; unknown keys
/// are rejected with std::invalid_argument naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Throws std::runtime_error naming the path when the file is missing or unreadable.
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

} // namespace goaltrack
