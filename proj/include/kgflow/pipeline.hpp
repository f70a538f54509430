#pragma once

#include <random>
#include <string>
#include <vector>

#include "kgflow/kgsim.hpp"
#include "kgflow/textio.hpp"

namespace kgflow {

// exit codes shared by the CLI and the pipeline
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitBounds = 3;

struct ExperimentConfig {
    std::string name = "experiment";
    unsigned long seed = 42;
    std::string out_dir = "out";
    bool strict = false;
    bool dry_run = false;
    ConfigFile raw;

    static ExperimentConfig load(const std::string& path);
};

// Synthetic Gaussian-enveloped coupling profiles for a pair basis, drawn
// deterministically from the given engine.
CouplingMap synthetic_couplings(const std::vector<SlotPair>& basis, int dim, std::mt19937& rng);

// Symmetric random overlap tensor over L slots (values O(1)).
std::vector<double> synthetic_overlaps(int slots, std::mt19937& rng);

// Runs the configured stages in dependency order, writing per-stage
// artifacts plus summary.txt under out_dir. Returns a process exit code.
int run_pipeline(const ExperimentConfig& cfg);

// Rebuilds the human-readable summary from persisted stage artifacts.
// Throws std::invalid_argument listing missing stages.
std::string emit_report(const std::string& artifact_dir);

}  // namespace kgflow
