#include "htbandit/envs.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace htbandit {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffULL;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(std::uint64_t h, double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, sizeof(bits));
    return fnv1a(h, bits);
}

}  // namespace

LossDistributionSpec::LossDistributionSpec(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw InvalidInput("loss distribution needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!std::isfinite(a.value)) throw InvalidInput("atom values must be finite");
        if (!(a.prob > 0.0)) throw InvalidInput("atom probabilities must be strictly positive");
        total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw InvalidInput("atom probabilities must sum to 1 within 1e-12, got " +
                           std::to_string(total));
}

double LossDistributionSpec::mean() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.prob * a.value;
    return m;
}

double LossDistributionSpec::max_abs_value() const {
    double m = 0.0;
    for (const auto& a : atoms_) m = std::max(m, std::abs(a.value));
    return m;
}

double analytic_moment(const LossDistributionSpec& dist, double alpha) {
    if (!(alpha > 1.0) || !(alpha <= 2.0)) throw InvalidInput("alpha must lie in (1, 2]");
    double m = 0.0;
    for (const auto& a : dist.atoms()) m += a.prob * std::pow(std::abs(a.value), alpha);
    return m;
}

double truncated_mean(const LossDistributionSpec& dist, double r) {
    if (!(r >= 0.0)) throw InvalidInput("truncation threshold must be >= 0");
    double m = 0.0;
    for (const auto& a : dist.atoms())
        if (std::abs(a.value) <= r) m += a.prob * a.value;
    return m;
}

bool verify_truncated_nonnegative(const LossDistributionSpec& dist) {
    // Distinct |value| levels; the tail expectation over {|X| >= level} is the
    // value the piecewise-constant map takes for M just below that level.
    std::set<double> levels;
    for (const auto& a : dist.atoms()) levels.insert(std::abs(a.value));
    // M = 0 is covered by the smallest positive level (zero atoms never
    // contribute to either side); a distribution of only zero atoms passes.
    for (double level : levels) {
        if (level == 0.0) continue;
        double tail = 0.0;
        for (const auto& a : dist.atoms())
            if (std::abs(a.value) >= level) tail += a.prob * a.value;
        if (tail < 0.0) return false;
    }
    return true;
}

double sample_loss(const LossDistributionSpec& dist, Rng& rng) {
    const double u = rng.uniform();
    double c = 0.0;
    for (const auto& a : dist.atoms()) {
        c += a.prob;
        if (u < c) return a.value;
    }
    return dist.atoms().back().value;  // guard against rounding in the cumsum
}

LossDistributionSpec make_bernoulli_heavy(double mu, const HeavyTailParams& params) {
    if (!(mu > 0.0) || !(mu < params.sigma))
        throw InvalidInput("make_bernoulli_heavy: need 0 < mu < sigma");
    const double sigma_alpha = std::pow(params.sigma, params.alpha);
    const double big = std::pow(sigma_alpha / mu, 1.0 / (params.alpha - 1.0));
    if (!(big >= mu)) throw InvalidInput("make_bernoulli_heavy: derived atom below the mean");
    const double p = mu / big;
    return LossDistributionSpec({{0.0, 1.0 - p}, {big, p}});
}

EnvironmentSpec::EnvironmentSpec(EnvKind kind, long horizon,
                                 std::vector<std::vector<LossDistributionSpec>> rows,
                                 std::optional<HeavyTailParams> tail,
                                 std::optional<GapProfile> gaps)
    : kind_(kind), horizon_(horizon), rows_(std::move(rows)), tail_(std::move(tail)),
      gaps_(std::move(gaps)) {
    if (horizon_ < 0) throw InvalidInput("environment horizon must be >= 0");
    if (rows_.empty() || rows_.front().empty())
        throw InvalidInput("environment schedule must be non-empty");
    num_arms_ = static_cast<int>(rows_.front().size());
    for (const auto& row : rows_)
        if (static_cast<int>(row.size()) != num_arms_)
            throw InvalidInput("environment schedule rows must all have K entries");

    row_means_.reserve(rows_.size());
    for (const auto& row : rows_) {
        std::vector<double> m;
        m.reserve(row.size());
        for (const auto& d : row) m.push_back(d.mean());
        row_means_.push_back(std::move(m));
    }

    if (gaps_) {
        const auto& g = *gaps_;
        if (g.optimal_arm < 1 || g.optimal_arm > num_arms_)
            throw InvalidInput("gap profile: optimal arm out of range");
        if (static_cast<int>(g.deltas.size()) != num_arms_)
            throw InvalidInput("gap profile: need one delta per arm");
        for (int i = 1; i <= num_arms_; ++i) {
            if (i == g.optimal_arm) continue;
            if (!(g.deltas[static_cast<std::size_t>(i - 1)] > 0.0))
                throw InvalidInput("gap profile: deltas must be strictly positive off the optimal arm");
            for (const auto& m : row_means_) {
                const double gap = m[static_cast<std::size_t>(i - 1)] -
                                   m[static_cast<std::size_t>(g.optimal_arm - 1)];
                if (gap < g.deltas[static_cast<std::size_t>(i - 1)] - 1e-12)
                    throw InvalidInput("gap profile violated by schedule row");
            }
        }
    }

    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, static_cast<std::uint64_t>(kind_));
    h = fnv1a(h, static_cast<std::uint64_t>(horizon_));
    for (const auto& row : rows_)
        for (const auto& d : row)
            for (const auto& a : d.atoms()) {
                h = fnv1a(h, a.value);
                h = fnv1a(h, a.prob);
            }
    fingerprint_ = h;
}

const LossDistributionSpec& EnvironmentSpec::dist_at(long t, int arm) const {
    if (t < 1 || t > horizon_) throw InvalidInput("dist_at: round out of range");
    if (arm < 1 || arm > num_arms_) throw InvalidInput("dist_at: arm out of range");
    const std::size_t row = static_cast<std::size_t>((t - 1) % static_cast<long>(rows_.size()));
    return rows_[row][static_cast<std::size_t>(arm - 1)];
}

double EnvironmentSpec::mean_at(long t, int arm) const {
    if (t < 1 || t > horizon_) throw InvalidInput("mean_at: round out of range");
    if (arm < 1 || arm > num_arms_) throw InvalidInput("mean_at: arm out of range");
    const std::size_t row = static_cast<std::size_t>((t - 1) % static_cast<long>(rows_.size()));
    return row_means_[row][static_cast<std::size_t>(arm - 1)];
}

MeanSchedule EnvironmentSpec::mean_schedule() const {
    MeanSchedule out;
    out.reserve(static_cast<std::size_t>(horizon_));
    for (long t = 1; t <= horizon_; ++t)
        out.push_back(row_means_[static_cast<std::size_t>((t - 1) % static_cast<long>(rows_.size()))]);
    return out;
}

bool verify_heavy_tail(const EnvironmentSpec& env, const HeavyTailParams& params) {
    const double budget = std::pow(params.sigma, params.alpha) * (1.0 + 1e-12);
    for (std::size_t r = 0; r < env.num_rows(); ++r)
        for (int i = 1; i <= env.num_arms(); ++i) {
            const long t = static_cast<long>(r) + 1;
            if (t > env.horizon()) break;
            if (analytic_moment(env.dist_at(t, i), params.alpha) > budget) return false;
        }
    return true;
}

EnvironmentSpec make_stochastic(const std::vector<double>& means, const HeavyTailParams& params,
                                long horizon) {
    if (means.empty()) throw InvalidInput("make_stochastic: need at least one arm");
    std::vector<LossDistributionSpec> row;
    row.reserve(means.size());
    for (double m : means) row.push_back(make_bernoulli_heavy(m, params));

    // A unique lowest mean induces a gap profile; report it so gap-dependent
    // bound checks apply.
    std::optional<GapProfile> gaps;
    std::size_t best = 0;
    for (std::size_t i = 1; i < means.size(); ++i)
        if (means[i] < means[best]) best = i;
    bool unique = true;
    for (std::size_t i = 0; i < means.size(); ++i)
        if (i != best && means[i] == means[best]) unique = false;
    if (unique && means.size() > 1) {
        GapProfile g;
        g.optimal_arm = static_cast<int>(best) + 1;
        for (double m : means) g.deltas.push_back(m - means[best]);
        gaps = std::move(g);
    }
    return EnvironmentSpec(EnvKind::Stochastic, horizon, {std::move(row)}, params, std::move(gaps));
}

EnvironmentSpec make_constrained_schedule(int num_arms, long horizon, const GapProfile& gaps,
                                          double base_mean, const DriftPattern& drift,
                                          const HeavyTailParams& params) {
    if (num_arms < 1) throw InvalidInput("make_constrained_schedule: need at least one arm");
    if (gaps.optimal_arm < 1 || gaps.optimal_arm > num_arms)
        throw InvalidInput("make_constrained_schedule: optimal arm out of range");
    if (static_cast<int>(gaps.deltas.size()) != num_arms)
        throw InvalidInput("make_constrained_schedule: need one delta per arm");
    if (!(drift.amplitude >= 0.0) || drift.period < 1)
        throw InvalidInput("make_constrained_schedule: bad drift pattern");

    const long period = drift.amplitude == 0.0 ? 1 : drift.period;
    std::vector<std::vector<LossDistributionSpec>> rows;
    rows.reserve(static_cast<std::size_t>(period));
    for (long s = 0; s < period; ++s) {
        const double offset =
            drift.amplitude == 0.0
                ? 0.0
                : (s < (drift.period + 1) / 2 ? -drift.amplitude : drift.amplitude);
        const double opt_mean = base_mean + offset;
        std::vector<LossDistributionSpec> row;
        row.reserve(static_cast<std::size_t>(num_arms));
        for (int i = 1; i <= num_arms; ++i) {
            const double mean =
                opt_mean + (i == gaps.optimal_arm ? 0.0 : gaps.deltas[static_cast<std::size_t>(i - 1)]);
            if (!(mean > 0.0) || !(mean < params.sigma))
                throw InvalidInput("make_constrained_schedule: drift band pushes a mean outside (0, sigma)");
            row.push_back(make_bernoulli_heavy(mean, params));
        }
        rows.push_back(std::move(row));
    }

    const EnvKind kind = drift.amplitude == 0.0 ? EnvKind::Stochastic : EnvKind::Constrained;
    EnvironmentSpec env(kind, horizon, std::move(rows), params, gaps);
    if (!verify_heavy_tail(env, params))
        throw InvalidInput("make_constrained_schedule: construction fails the moment bound");
    return env;
}

EnvironmentSpec make_adversarial(const std::vector<std::vector<double>>& mean_pattern,
                                 const HeavyTailParams& params, long horizon) {
    if (mean_pattern.empty()) throw InvalidInput("make_adversarial: empty mean pattern");
    std::vector<std::vector<LossDistributionSpec>> rows;
    rows.reserve(mean_pattern.size());
    for (const auto& means : mean_pattern) {
        std::vector<LossDistributionSpec> row;
        row.reserve(means.size());
        for (double m : means) row.push_back(make_bernoulli_heavy(m, params));
        rows.push_back(std::move(row));
    }
    return EnvironmentSpec(EnvKind::Adversarial, horizon, std::move(rows), params, std::nullopt);
}

}  // namespace htbandit
