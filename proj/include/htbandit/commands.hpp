#pragma once

#include <string>
#include <vector>

#include "htbandit/config.hpp"
#include "htbandit/runner.hpp"

namespace htbandit {

struct RunResult {
    RegretSeries series;
    std::vector<BoundReport> bounds;
    std::vector<std::string> notes;  // e.g. gap-dependent checks not applicable
    std::string regret_csv;
    std::string trace_csv;  // empty when traces were not requested
    std::string bounds_json;
    std::string plot_script;
    bool all_bounds_satisfied = true;
};

// Runs the configured experiment and writes regret.csv, optional trace.csv,
// bounds.json and a gnuplot script into the config's output directory.
// Re-running the same config produces byte-identical files.
RunResult cmd_run(const ExperimentConfig& config);

struct SlopeFit {
    double slope = 0.0;
    double ci_half_width = 0.0;  // 95% confidence
    int points = 0;
};

// OLS of log(mean_regret) on log(t) over the pooled checkpoints with t >= t_min
// (rows with non-positive regret are unusable). Needs at least 3 points.
SlopeFit cmd_slope(const std::vector<std::string>& regret_csv_paths, long t_min);

struct CsvAuditResult {
    int replicate = 0;
    int final_epoch = 0;
    long doublings = 0;
    long rounds = 0;
};

// Epoch audit over a written trace.csv (per replicate). The file does not
// carry the arm-weight vector, but the kept-round cost reconstructs from the
// recorded threshold alone: c = 2 * theta_2 * loss^2 / threshold.
// num_arms <= 0 infers K as the highest arm index appearing in the file.
std::vector<CsvAuditResult> cmd_audit(const std::string& trace_csv_path, int num_arms = 0);

struct EnvVerifyReport {
    bool heavy_tail_ok = false;
    bool truncated_nonnegative_ok = false;  // at the optimal arm
    int optimal_arm = 0;
    std::string text;  // per-arm analytic moments, human readable
};

EnvVerifyReport cmd_verify_env(const ExperimentConfig& config);

// Replicate parallelism cap: HTBANDIT_THREADS when set, else hardware.
int resolve_thread_cap();

// Fixed-format float used in every artifact file (12 significant digits).
std::string format_number(double v);

}  // namespace htbandit
