#include "htbandit/policies.hpp"

#include <cmath>
#include <limits>

#include "htbandit/tsallis.hpp"

namespace htbandit {

namespace {

int sample_arm(const SimplexPoint& x, Rng& rng) {
    const double u = rng.uniform();
    double c = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        c += x[i];
        if (u < c) return i + 1;
    }
    return x.size();
}

// Smallest integer k with 2^k >= q, for q > 0. The float log2 estimate is
// corrected so exact powers of two never land on the wrong side.
int ceil_log2(double q) {
    int k = static_cast<int>(std::ceil(std::log2(q)));
    while (std::exp2(static_cast<double>(k)) < q) ++k;
    while (std::exp2(static_cast<double>(k - 1)) >= q) --k;
    return k;
}

}  // namespace

double htinf_threshold(const HeavyTailParams& params, long t, double x_arm) {
    return theta_alpha(params.alpha) * params.sigma *
           std::pow(static_cast<double>(t), 1.0 / params.alpha) * std::pow(x_arm, 1.0 / params.alpha);
}

double adatinf_threshold(double lambda, long t, double x_arm) {
    return lambda * theta_alpha(2.0) * std::sqrt(static_cast<double>(t)) * std::sqrt(x_arm);
}

double adatinf_kept_cost(double lambda, long t, double x_arm, double loss) {
    const double eta = 1.0 / (lambda * std::sqrt(static_cast<double>(t)));
    return 2.0 * eta * loss * loss / std::sqrt(x_arm);
}

// -- HtinfPolicy ---------------------------------------------------------------

HtinfPolicy::HtinfPolicy(int num_arms, const HeavyTailParams& params, std::uint64_t seed,
                         bool skipping, std::string name)
    : num_arms_(num_arms), params_(params), theta_(theta_alpha(params.alpha)),
      skipping_(skipping), name_(std::move(name)),
      cum_(static_cast<std::size_t>(num_arms), 0.0), rng_(seed) {
    if (num_arms_ < 1) throw InvalidInput("policy needs at least one arm");
}

ChooseResult HtinfPolicy::choose() {
    if (awaiting_update_) throw ProtocolViolation("choose called twice without an update");

    if (num_arms_ == 1) {
        last_x_ = SimplexPoint::interior({1.0});
    } else {
        const double eta = 1.0 / (params_.sigma * std::pow(static_cast<double>(t_), 1.0 / params_.alpha));
        last_x_ = ftrl_argmin(FtrlProblem(cum_, eta, params_.alpha));
    }
    last_arm_ = sample_arm(last_x_, rng_);
    last_threshold_ = skipping_ ? htinf_threshold(params_, t_, last_x_[last_arm_ - 1])
                                : std::numeric_limits<double>::infinity();
    awaiting_update_ = true;
    return {last_x_, last_arm_, last_threshold_, 1.0, std::nullopt};
}

UpdateResult HtinfPolicy::update(double loss) {
    if (!awaiting_update_) throw ProtocolViolation("update without a preceding choose");
    const bool skipped = std::abs(loss) > last_threshold_;
    if (!skipped) cum_[static_cast<std::size_t>(last_arm_ - 1)] += loss / last_x_[last_arm_ - 1];
    ++t_;
    awaiting_update_ = false;
    return {skipped, std::nullopt};
}

std::unique_ptr<HtinfPolicy> make_opttinf(int num_arms, std::uint64_t seed) {
    return std::make_unique<HtinfPolicy>(num_arms, HeavyTailParams(2.0, 1.0), seed, true, "opttinf");
}

std::unique_ptr<HtinfPolicy> make_tsallis_inf_baseline(int num_arms, std::uint64_t seed) {
    return std::make_unique<HtinfPolicy>(num_arms, HeavyTailParams(2.0, 1.0), seed, false,
                                         "tsallis_inf");
}

// -- AdatinfPolicy -------------------------------------------------------------

AdatinfPolicy::AdatinfPolicy(int num_arms, long horizon, std::uint64_t seed)
    : num_arms_(num_arms), horizon_(horizon),
      doubling_root_(std::sqrt(static_cast<double>(num_arms) * static_cast<double>(horizon + 1))),
      cum_(static_cast<std::size_t>(num_arms), 0.0), rng_(seed) {
    if (num_arms_ < 1) throw InvalidInput("policy needs at least one arm");
    if (horizon_ < 0) throw InvalidInput("horizon must be >= 0");
}

ChooseResult AdatinfPolicy::choose() {
    if (awaiting_update_) throw ProtocolViolation("choose called twice without an update");
    if (t_ > horizon_) throw ProtocolViolation("policy frozen: horizon exhausted");

    last_lambda_ = std::exp2(static_cast<double>(epoch_));
    if (num_arms_ == 1) {
        last_x_ = SimplexPoint::interior({1.0});
    } else {
        const double eta = 1.0 / (last_lambda_ * std::sqrt(static_cast<double>(t_)));
        last_x_ = ftrl_argmin(FtrlProblem(cum_, eta, 2.0));
    }
    last_arm_ = sample_arm(last_x_, rng_);
    last_threshold_ = adatinf_threshold(last_lambda_, t_, last_x_[last_arm_ - 1]);
    awaiting_update_ = true;
    return {last_x_, last_arm_, last_threshold_, last_lambda_, epoch_};
}

UpdateResult AdatinfPolicy::update(double loss) {
    if (!awaiting_update_) throw ProtocolViolation("update without a preceding choose");
    const bool skipped = std::abs(loss) > last_threshold_;
    double cost;
    if (skipped) {
        cost = loss;
    } else {
        cost = adatinf_kept_cost(last_lambda_, t_, last_x_[last_arm_ - 1], loss);
        cum_[static_cast<std::size_t>(last_arm_ - 1)] += loss / last_x_[last_arm_ - 1];
    }
    accumulator_ += cost;
    if (std::exp2(static_cast<double>(epoch_)) * doubling_root_ < accumulator_) {
        int jump = epoch_ + 1;
        if (cost > 0.0) jump = std::max(jump, ceil_log2(cost / doubling_root_) + 1);
        epoch_ = jump;
        accumulator_ = cost;
    }
    ++t_;
    awaiting_update_ = false;
    return {skipped, cost};
}

// -- Ada2tinfPolicy ------------------------------------------------------------

Ada2tinfPolicy::Ada2tinfPolicy(int num_arms, std::uint64_t seed)
    : num_arms_(num_arms), seed_(seed) {
    if (num_arms_ < 1) throw InvalidInput("policy needs at least one arm");
}

std::uint64_t Ada2tinfPolicy::inner_seed(std::uint64_t seed, int super_epoch) {
    return derive_seed(seed, 0x696e6e6572ULL, static_cast<std::uint64_t>(super_epoch));
}

ChooseResult Ada2tinfPolicy::choose() {
    if (t_ >= next_restart_) {
        block_length_ *= 2;
        next_restart_ += block_length_ - 1;
        ++super_epoch_;
        inner_ = std::make_unique<AdatinfPolicy>(num_arms_, block_length_ - 1,
                                                 inner_seed(seed_, super_epoch_));
        restart_rounds_.push_back(t_);
    }
    return inner_->choose();
}

UpdateResult Ada2tinfPolicy::update(double loss) {
    if (!inner_) throw ProtocolViolation("update without a preceding choose");
    const UpdateResult u = inner_->update(loss);
    ++t_;
    return u;
}

// -- Factories -----------------------------------------------------------------

std::string_view policy_kind_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Htinf: return "htinf";
        case PolicyKind::Opttinf: return "opttinf";
        case PolicyKind::Adatinf: return "adatinf";
        case PolicyKind::Ada2tinf: return "ada2tinf";
        case PolicyKind::TsallisInf: return "tsallis_inf";
    }
    return "unknown";
}

std::optional<PolicyKind> policy_kind_from_name(std::string_view name) {
    if (name == "htinf") return PolicyKind::Htinf;
    if (name == "opttinf") return PolicyKind::Opttinf;
    if (name == "adatinf") return PolicyKind::Adatinf;
    if (name == "ada2tinf") return PolicyKind::Ada2tinf;
    if (name == "tsallis_inf") return PolicyKind::TsallisInf;
    return std::nullopt;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, int num_arms, long horizon,
                                    std::uint64_t seed) {
    switch (spec.kind) {
        case PolicyKind::Htinf:
            if (!spec.params) throw InvalidInput("htinf requires heavy-tail hyper-parameters");
            return std::make_unique<HtinfPolicy>(num_arms, *spec.params, seed);
        case PolicyKind::Opttinf:
            return make_opttinf(num_arms, seed);
        case PolicyKind::Adatinf:
            return std::make_unique<AdatinfPolicy>(num_arms, horizon, seed);
        case PolicyKind::Ada2tinf:
            return std::make_unique<Ada2tinfPolicy>(num_arms, seed);
        case PolicyKind::TsallisInf:
            return make_tsallis_inf_baseline(num_arms, seed);
    }
    throw InvalidInput("unknown policy kind");
}

}  // namespace htbandit
