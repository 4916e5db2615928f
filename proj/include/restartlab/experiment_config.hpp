#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "restartlab/sweep_harness.hpp"
#include "restartlab/trajectory_sim.hpp"

namespace restartlab {

/// One fully resolved simulation run parsed from a JSON experiment config.
struct SimulationSetup {
    std::variant<Spectrum, std::vector<Block>, QuadraticProblem> model;
    std::optional<InnerConfig> inner;  // present for quadratic models
    OuterHyperparams hyper;
    TransitionKind kind;
    RestartSchedule schedule;
    int horizon;
    std::string output_path;
    std::vector<double> x0;  // spectrum-model initial residuals; empty = all ones
};

struct SweepRunSetup {
    SweepConfig config;
    std::string output_path;
};

/// Parses and validates an experiment config. Relative matrix-file paths
/// resolve against base_dir. Throws config_error with a line/field diagnostic.
SimulationSetup parse_experiment_config(const std::string& json_text,
                                        const std::filesystem::path& base_dir);

SimulationSetup load_experiment_config(const std::filesystem::path& file);

SweepRunSetup parse_sweep_config(const std::string& json_text);
SweepRunSetup load_sweep_config(const std::filesystem::path& file);

/// Normalized serialization (fixed key order, defaults materialized).
/// parse -> serialize -> parse is the identity on this form.
std::string canonical_experiment_config(const std::string& json_text);
std::string canonical_sweep_config(const std::string& json_text);

/// Spectrum file: {"sigmas": [...], "weights": [...]} or the derived form
/// {"eta": ..., "steps": ..., "lambdas": [...], "weights": [...]}.
Spectrum load_spectrum_file(const std::filesystem::path& file);

/// Headerless CSV of n rows x n columns.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& file);

TransitionKind parse_kind(const std::string& name);

}  // namespace restartlab
