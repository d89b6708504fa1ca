#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "htbandit/core.hpp"
#include "htbandit/envs.hpp"
#include "htbandit/policies.hpp"

namespace htbandit {

struct EpisodeTrace {
    std::vector<RoundRecord> records;
    std::string policy_name;
    double policy_alpha = 2.0;  // the policy's hyper-parameters, not the environment's
    double policy_sigma = 1.0;
    std::uint64_t env_fingerprint = 0;
    std::uint64_t seed = 0;
};

// One full choose/sample/update loop over the environment's horizon. The
// policy and environment streams are derived from `seed`, so the same triple
// reproduces the trace bit for bit.
EpisodeTrace run_episode(const PolicySpec& policy, const EnvironmentSpec& env, std::uint64_t seed);

struct ExperimentSpec {
    PolicySpec policy;
    std::vector<long> checkpoints;  // strictly increasing, last one at the horizon
    int replicates = 1;
    std::uint64_t base_seed = 0;
    int max_threads = 0;  // <= 0: hardware concurrency
};

// R independent replicates with seeds derived per replicate index; replicates
// may run in parallel, aggregation is performed in replicate order so the
// result does not depend on scheduling. The optional sink receives each
// replicate's trace (possibly from a worker thread; it must be thread-safe).
using TraceSink = std::function<void(int replicate, const EpisodeTrace&)>;
RegretSeries run_experiment(const ExperimentSpec& spec, const EnvironmentSpec& env,
                            const TraceSink& sink = {});

// Pseudo-regret of the trace prefix ending at each checkpoint (comparator
// recomputed per prefix).
std::vector<double> checkpoint_regrets(const EpisodeTrace& trace, const EnvironmentSpec& env,
                                       const std::vector<long>& checkpoints);

// The two terms of the per-trace regret decomposition: the skipping gap
// sum_t <x_t - e_i*, mu_t - mu'_t> with mu' the analytic truncated means at the
// realized thresholds (extended per arm via r_t(i) = r_t * (x_i/x_arm)^(1/alpha),
// the threshold each arm would have realized this round), and the FTRL error
// sum_t <x_t - e_i*, lhat_t> with the realized importance-sampled estimates.
// Their sum is an unbiased proxy for the pseudo-regret in expectation.
struct RegretDecomposition {
    double skipping_gap = 0.0;
    double ftrl_error = 0.0;
};
RegretDecomposition decompose_regret(const EpisodeTrace& trace, const EnvironmentSpec& env);

// Both sides of the FTRL regret decomposition inequality on a completed
// single-instance trace, with the drifted loss vectors:
//   sum_t <x_t - y, lhat'_t>  <=  Part(A) + Part(B),
//   Part(A) = sum_t (eta_t^-1 - eta_{t-1}^-1)(Psi(y) - Psi(x_t)),
//   Part(B) = sum_t eta_t^-1 * D_Psi(x_t, z_t),
// for y the comparator one-hot point. Learning rates reconstruct from the
// trace as eta_t^-1 = sigma * t^(1/alpha) * lambda_t.
struct FtrlDecomposition {
    double lhs = 0.0;
    double part_a = 0.0;
    double part_b = 0.0;
    bool holds(double rel_slack = 1e-6) const {
        return lhs <= part_a + part_b + rel_slack * std::max(1.0, std::abs(part_a + part_b));
    }
};
FtrlDecomposition ftrl_decomposition(const EpisodeTrace& trace, int comparator_arm);

// Replays an adaptive-policy trace: recomputes every cost entry, tracks the
// epoch bookkeeping, and asserts the epoch-boundary inequalities
//   seed_j + sum_{T_j minus tau_j} c_t <= 2^j sqrt(K(T+1))
//   sum_{T_j} c_t > 2^(j-1) sqrt(K(T+1))        (closed epochs)
//   end-of-run accumulator <= 2^J sqrt(K(T+1))  (final epoch)
// within 1e-9. Throws AuditFailure naming the offending epoch.
struct EpochAuditSummary {
    int final_epoch = 0;
    long doublings = 0;
};
EpochAuditSummary audit_epochs(const EpisodeTrace& trace);

// Closed-form regret bounds with fully explicit constants.
double bound_htinf_adversarial(double alpha, double sigma, int num_arms, long horizon);
double bound_htinf_gap(double alpha, double sigma, const GapProfile& gaps, long horizon);
double bound_opttinf_adversarial(double alpha, double sigma, int num_arms, long horizon);
double bound_opttinf_gap(double alpha, double sigma, const GapProfile& gaps, long horizon);
double bound_adatinf(double alpha, double sigma, int num_arms, long horizon);
double bound_ada2tinf(double alpha, double sigma, int num_arms, long horizon);

// Gap-dependent constants carry an exp(O(1/(alpha-1))) factor; below this
// cutoff the checks are reported as not applicable rather than evaluated.
inline constexpr double kGapBoundMinAlpha = 1.2;
bool gap_bound_applicable(double alpha);

struct BoundReport {
    std::string bound_name;       // ThmA1-adv | ThmA1-sto | ThmB1-adv | ThmB1-sto | ThmC1
    double measured_regret = 0.0; // mean regret at the horizon + 3 standard errors
    double bound_value = 0.0;
    bool satisfied = false;
};

// Evaluates the bounds applicable to the policy kind with the environment's
// declared tail parameters (and gap profile where present). Entries whose
// preconditions fail (no gaps, alpha below the cutoff) are omitted.
std::vector<BoundReport> bound_report(const RegretSeries& series, const EnvironmentSpec& env,
                                      PolicyKind kind);

}  // namespace htbandit
