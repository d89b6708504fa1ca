#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "htbandit/envs.hpp"
#include "htbandit/policies.hpp"

namespace htbandit {

// Declarative environment description as it appears in a config file. The
// schedule itself is built on demand (build_environment) so configs stay small
// even for long horizons.
struct EnvConfig {
    std::string kind;  // stochastic | constrained | adversarial
    double alpha = 2.0;
    double sigma = 1.0;

    // stochastic: exactly one of `means` / `arms` (explicit atoms, [value, prob] pairs)
    std::optional<std::vector<double>> means;
    std::optional<std::vector<std::vector<std::pair<double, double>>>> arms;

    // constrained
    std::optional<double> base_mean;
    std::optional<std::vector<double>> gaps;
    std::optional<int> optimal_arm;  // 1-based
    std::optional<DriftPattern> drift;

    // adversarial: per-round mean rows, cycled over the horizon
    std::optional<std::vector<std::vector<double>>> mean_pattern;
};

struct ExperimentConfig {
    PolicyKind policy = PolicyKind::Opttinf;
    std::optional<double> alpha;  // htinf hyper-parameters; rejected elsewhere
    std::optional<double> sigma;
    long horizon = 0;  // T
    int num_arms = 0;  // K
    int replicates = 1;
    std::uint64_t base_seed = 0;
    std::vector<long> checkpoints;  // defaulted to powers of two + T when absent
    bool write_trace = false;
    std::string output_dir = ".";
    EnvConfig env;
};

// Parses and validates a JSON config. Unknown keys anywhere are errors; all
// messages carry the offending field path. `base_dir` resolves an
// {"file": "..."} environment reference relative to the config's location.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");

// Canonical JSON form; parse(serialize(parse(text))) is semantically identical
// to parse(text).
std::string serialize_config(const ExperimentConfig& config);

// Materializes the loss schedule declared by the config.
EnvironmentSpec build_environment(const ExperimentConfig& config);

// Powers of two up to the horizon, closed with the horizon itself.
std::vector<long> default_checkpoints(long horizon);

}  // namespace htbandit
