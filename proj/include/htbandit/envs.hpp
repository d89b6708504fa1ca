#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "htbandit/core.hpp"
#include "htbandit/rng.hpp"

namespace htbandit {

// Finite discrete loss distribution. Finite support keeps every quantity the
// verifiers need (moments, truncated means, tail expectations) exactly
// computable from the atoms.
class LossDistributionSpec {
public:
    struct Atom {
        double value;
        double prob;
    };

    explicit LossDistributionSpec(std::vector<Atom> atoms);

    const std::vector<Atom>& atoms() const { return atoms_; }
    double mean() const;
    double max_abs_value() const;

private:
    std::vector<Atom> atoms_;
};

// E |ell|^alpha, exactly over the atoms.
double analytic_moment(const LossDistributionSpec& dist, double alpha);

// E[ ell * 1{|ell| <= r} ], exactly over the atoms. Requires r >= 0.
double truncated_mean(const LossDistributionSpec& dist, double r);

// True iff E[ X * 1{|X| > M} ] >= 0 for every M >= 0. The tail expectation is
// piecewise constant in M, so checking just below each distinct |atom| value
// (and at M = 0) is exhaustive.
bool verify_truncated_nonnegative(const LossDistributionSpec& dist);

// Inverse-CDF draw over the atoms in listed order.
double sample_loss(const LossDistributionSpec& dist, Rng& rng);

// Two-point instance {0 w.p. 1-p, M w.p. p} with M = (sigma^alpha/mu)^(1/(alpha-1))
// and p = mu/M: mean exactly mu, alpha-moment exactly sigma^alpha (the
// assumption boundary). Requires 0 < mu < sigma.
LossDistributionSpec make_bernoulli_heavy(double mu, const HeavyTailParams& params);

enum class EnvKind { Stochastic, Constrained, Adversarial };

// Declared gap structure of a constrained environment: a single optimal arm
// beats arm i by at least delta_i at every round.
struct GapProfile {
    int optimal_arm = 1;          // 1-based
    std::vector<double> deltas;   // delta at the optimal arm's slot is 0
};

// Square-wave drift applied to the optimal arm's base mean: -amplitude on the
// first half of each period, +amplitude on the second.
struct DriftPattern {
    double amplitude = 0.0;
    long period = 1;
};

// A T x K schedule of loss distributions, stored as rows cycled over the
// horizon. Stochastic environments hold one row; periodic constrained
// schedules hold one period; adversarial schedules may enumerate all rounds.
class EnvironmentSpec {
public:
    EnvironmentSpec(EnvKind kind, long horizon,
                    std::vector<std::vector<LossDistributionSpec>> rows,
                    std::optional<HeavyTailParams> tail = std::nullopt,
                    std::optional<GapProfile> gaps = std::nullopt);

    EnvKind kind() const { return kind_; }
    int num_arms() const { return num_arms_; }
    long horizon() const { return horizon_; }
    const std::optional<HeavyTailParams>& tail_params() const { return tail_; }
    const std::optional<GapProfile>& gap_profile() const { return gaps_; }
    std::size_t num_rows() const { return rows_.size(); }

    const LossDistributionSpec& dist_at(long t, int arm) const;  // t, arm 1-based
    double mean_at(long t, int arm) const;
    MeanSchedule mean_schedule() const;  // materialized T x K true means

    std::uint64_t fingerprint() const { return fingerprint_; }

private:
    EnvKind kind_;
    int num_arms_;
    long horizon_;
    std::vector<std::vector<LossDistributionSpec>> rows_;
    std::vector<std::vector<double>> row_means_;
    std::optional<HeavyTailParams> tail_;
    std::optional<GapProfile> gaps_;
    std::uint64_t fingerprint_;
};

// True iff every distribution in the schedule has alpha-moment <= sigma^alpha.
// Relative slack 1e-12 keeps instances built to meet the bound with equality
// from failing on the last ulp.
bool verify_heavy_tail(const EnvironmentSpec& env, const HeavyTailParams& params);

// Stochastic environment from per-arm means, all atoms via make_bernoulli_heavy.
EnvironmentSpec make_stochastic(const std::vector<double>& means, const HeavyTailParams& params,
                                long horizon);

// Constrained schedule: the optimal arm's mean follows base_mean plus the
// drift pattern, every other arm sits exactly gaps[i] above it. Zero amplitude
// degenerates to a stochastic environment. Throws if any mean leaves (0, sigma).
EnvironmentSpec make_constrained_schedule(int num_arms, long horizon, const GapProfile& gaps,
                                          double base_mean, const DriftPattern& drift,
                                          const HeavyTailParams& params);

// Oblivious adversarial schedule: mean_pattern rows are cycled over the horizon.
EnvironmentSpec make_adversarial(const std::vector<std::vector<double>>& mean_pattern,
                                 const HeavyTailParams& params, long horizon);

}  // namespace htbandit
