#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bats/analytics.hpp"
#include "bats/sim.hpp"

namespace bats::experiment {

enum class Mode { kPlan, kSimulate, kSweep, kRobustness, kSinglePhase };

const char* to_string(Mode m);

/// Invalid or missing configuration entry; `field()` names the key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct ExperimentConfig {
    Mode mode = Mode::kPlan;
    NetworkParams params;
    std::optional<int> n;          // overrides the planned n*
    std::uint64_t seed = 1;
    int runs = 1;
    std::string degree_file;
    std::filesystem::path out_dir = ".";
    sim::Access access = sim::Access::kRoundRobin;
    std::int64_t slot_cap = 0;
    bool trace = false;
    int k_min = 2;                 // sweep
    int k_max = 10;
    bool sweep_simulate = false;
    int design_k = 3;              // robustness
    int actual_k = 9;

    std::set<std::string> explicit_keys;

    /// Applies one key=value entry. Throws ConfigError for unknown keys or
    /// unparsable values.
    void set(const std::string& key, const std::string& value);
    /// Mode-specific required keys and value ranges.
    void validate() const;
    /// Flat "key=value" text, with the keys in config_keys().
    std::string describe() const;
};

/// Recognized configuration keys.
const std::vector<std::string>& config_keys();

/// Flat key=value lines; blank lines and '#' comments are skipped.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Base simulator config derived from an experiment config and a batch count.
sim::SimConfig sim_config(const ExperimentConfig& cfg, int n);

/// Runs seeds seed, seed+1, ... (runs of them), possibly concurrently;
/// results are ordered by seed.
std::vector<sim::SimReport> run_seeds(const sim::SimConfig& base, int runs);

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
};
Summary summarize(const std::vector<double>& xs);

/// Total-variation distance between two probability vectors of equal length.
double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Executes the configured mode, writing CSVs into out_dir and a short
/// human-readable report to `log`. Returns the report's headline line.
std::string execute(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace bats::experiment
