#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "htbandit/core.hpp"
#include "htbandit/rng.hpp"

namespace htbandit {

// A bandit policy is a single-actor state machine driven by strictly
// alternating choose/update calls. Arm sampling uses inverse-CDF over the
// weight vector on the policy's own seeded stream, so a (policy, seed) pair
// reproduces its action sequence exactly.

struct ChooseResult {
    SimplexPoint x;
    int arm = 0;  // 1-based
    double threshold = 0.0;
    double lambda = 1.0;
    std::optional<int> epoch;
};

struct UpdateResult {
    bool skipped = false;
    std::optional<double> cost;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual ChooseResult choose() = 0;
    virtual UpdateResult update(double loss) = 0;
    virtual std::string_view name() const = 0;
    virtual int num_arms() const = 0;
    // The (alpha, sigma) hyper-parameters driving thresholds and learning
    // rates; (2, 1) for the whole optimistic/adaptive family.
    virtual HeavyTailParams hyper_params() const = 0;
};

// Skipping threshold of the static policy: theta_alpha * sigma * t^(1/alpha) * x^(1/alpha).
double htinf_threshold(const HeavyTailParams& params, long t, double x_arm);

// Skipping threshold of the adaptive policy: lambda * (1 - 2^(-1/3)) * sqrt(t) * sqrt(x).
double adatinf_threshold(double lambda, long t, double x_arm);

// Cost bookkeeping entry of a kept round: 2 * eta_t * x^(-1/2) * loss^2 with
// eta_t = 1 / (lambda * sqrt(t)).
double adatinf_kept_cost(double lambda, long t, double x_arm, double loss);

// FTRL with the 1/alpha-Tsallis regularizer, learning rate 1/(sigma*t^(1/alpha)),
// importance-sampled loss estimates, and an action-dependent skipping rule:
// rounds whose |loss| exceeds the threshold contribute a zero estimate.
// Requires the heavy-tail parameters as hyper-parameters; horizonless.
class HtinfPolicy : public Policy {
public:
    HtinfPolicy(int num_arms, const HeavyTailParams& params, std::uint64_t seed,
                bool skipping = true, std::string name = "htinf");

    ChooseResult choose() override;
    UpdateResult update(double loss) override;
    std::string_view name() const override { return name_; }
    int num_arms() const override { return num_arms_; }
    HeavyTailParams hyper_params() const override { return params_; }

    long round() const { return t_; }
    const std::vector<double>& cumulative_estimate() const { return cum_; }
    const HeavyTailParams& params() const { return params_; }

private:
    int num_arms_;
    HeavyTailParams params_;
    double theta_;
    bool skipping_;
    std::string name_;
    std::vector<double> cum_;
    long t_ = 1;
    Rng rng_;
    bool awaiting_update_ = false;
    SimplexPoint last_x_;
    int last_arm_ = 0;
    double last_threshold_ = 0.0;
};

// The same machinery run "optimistically" with hyper-parameters alpha=2, sigma=1
// when the true heavy-tail parameters are unknown.
std::unique_ptr<HtinfPolicy> make_opttinf(int num_arms, std::uint64_t seed);

// Comparison baseline: alpha=2, sigma=1 with skipping disabled (infinite threshold).
std::unique_ptr<HtinfPolicy> make_tsallis_inf_baseline(int num_arms, std::uint64_t seed);

// Horizon-aware adaptive policy: the alpha=2 machinery with a doubling
// multiplier lambda = 2^J applied to both learning rate and threshold. Each
// round adds a cost c_t to the epoch accumulator S_J; once S_J exceeds
// 2^J * sqrt(K(T+1)) the multiplier jumps to
//   J <- max{ J+1, ceil(log2(c_t / sqrt(K(T+1)))) + 1 }
// (the log term reads as -infinity when c_t <= 0) and S is reseeded with c_t.
// Frozen after T rounds: further choose calls throw.
class AdatinfPolicy : public Policy {
public:
    AdatinfPolicy(int num_arms, long horizon, std::uint64_t seed);

    ChooseResult choose() override;
    UpdateResult update(double loss) override;
    std::string_view name() const override { return "adatinf"; }
    int num_arms() const override { return num_arms_; }
    HeavyTailParams hyper_params() const override { return {2.0, 1.0}; }

    long round() const { return t_; }
    long horizon() const { return horizon_; }
    int epoch_index() const { return epoch_; }
    double epoch_accumulator() const { return accumulator_; }

private:
    int num_arms_;
    long horizon_;
    double doubling_root_;  // sqrt(K(T+1))
    std::vector<double> cum_;
    long t_ = 1;
    int epoch_ = 0;
    double accumulator_ = 0.0;
    Rng rng_;
    bool awaiting_update_ = false;
    SimplexPoint last_x_;
    int last_arm_ = 0;
    double last_threshold_ = 0.0;
    double last_lambda_ = 1.0;
};

// Horizon-free wrapper: runs fresh AdatinfPolicy instances over super-epochs of
// lengths 1, 3, 7, 15, ... (restarts at rounds 1, 2, 5, 12, 27, ...), each
// inner instance declared with exactly its super-epoch length as horizon.
class Ada2tinfPolicy : public Policy {
public:
    Ada2tinfPolicy(int num_arms, std::uint64_t seed);

    ChooseResult choose() override;
    UpdateResult update(double loss) override;
    std::string_view name() const override { return "ada2tinf"; }
    int num_arms() const override { return num_arms_; }
    HeavyTailParams hyper_params() const override { return {2.0, 1.0}; }

    static std::uint64_t inner_seed(std::uint64_t seed, int super_epoch);
    const std::vector<long>& restart_rounds() const { return restart_rounds_; }
    long current_inner_horizon() const { return inner_ ? inner_->horizon() : 0; }

private:
    int num_arms_;
    std::uint64_t seed_;
    long t_ = 1;
    long block_length_ = 1;   // T_0 in the doubling schedule
    long next_restart_ = 1;
    int super_epoch_ = 0;
    std::unique_ptr<AdatinfPolicy> inner_;
    std::vector<long> restart_rounds_;
};

enum class PolicyKind { Htinf, Opttinf, Adatinf, Ada2tinf, TsallisInf };

std::string_view policy_kind_name(PolicyKind kind);
std::optional<PolicyKind> policy_kind_from_name(std::string_view name);

struct PolicySpec {
    PolicyKind kind = PolicyKind::Opttinf;
    std::optional<HeavyTailParams> params;  // required iff kind == Htinf
};

// Instantiate a policy for one episode. `horizon` is consumed by the
// horizon-aware kind only.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, int num_arms, long horizon,
                                    std::uint64_t seed);

}  // namespace htbandit
