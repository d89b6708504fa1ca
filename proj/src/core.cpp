#include "htbandit/core.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace htbandit {

SimplexPoint SimplexPoint::interior(std::vector<double> weights) {
    if (weights.empty()) throw InvalidInput("simplex point must be non-empty");
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || !(w > 0.0))
            throw InvalidInput("interior simplex point requires strictly positive weights");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidInput("simplex weights must sum to 1 within 1e-9, got " + std::to_string(sum));
    SimplexPoint p;
    p.w_ = std::move(weights);
    return p;
}

SimplexPoint SimplexPoint::one_hot(int num_arms, int arm) {
    if (num_arms < 1) throw InvalidInput("one_hot: need at least one arm");
    if (arm < 1 || arm > num_arms) throw InvalidInput("one_hot: arm out of range");
    SimplexPoint p;
    p.w_.assign(static_cast<std::size_t>(num_arms), 0.0);
    p.w_[static_cast<std::size_t>(arm - 1)] = 1.0;
    p.one_hot_ = true;
    return p;
}

void RegretSeries::validate() const {
    long prev = 0;
    for (const auto& c : checkpoints) {
        if (c.t <= prev) throw InvalidInput("regret series checkpoints must be strictly increasing");
        prev = c.t;
    }
    if (!checkpoints.empty() && checkpoints.back().t != horizon)
        throw InvalidInput("last regret checkpoint must sit at the horizon");
    if (checkpoints.empty() && horizon != 0)
        throw InvalidInput("non-empty horizon requires checkpoints");
}

double pseudo_regret(const std::vector<RoundRecord>& trace, const MeanSchedule& means) {
    if (trace.size() != means.size())
        throw InvalidInput("pseudo_regret: trace length does not match mean schedule rows");
    if (means.empty()) return 0.0;

    const std::size_t num_arms = means.front().size();
    if (num_arms == 0) throw InvalidInput("pseudo_regret: empty mean rows");

    double played = 0.0;
    std::vector<double> arm_sum(num_arms, 0.0);
    for (std::size_t t = 0; t < means.size(); ++t) {
        const auto& row = means[t];
        if (row.size() != num_arms) throw InvalidInput("pseudo_regret: ragged mean schedule");
        const int arm = trace[t].arm;
        if (arm < 1 || arm > static_cast<int>(num_arms))
            throw InvalidInput("pseudo_regret: arm index out of range at round " + std::to_string(t + 1));
        played += row[static_cast<std::size_t>(arm - 1)];
        for (std::size_t i = 0; i < num_arms; ++i) arm_sum[i] += row[i];
    }

    double best = arm_sum[0];
    for (std::size_t i = 1; i < num_arms; ++i)
        if (arm_sum[i] < best) best = arm_sum[i];
    return played - best;
}

int best_arm_in_hindsight(const MeanSchedule& means) {
    if (means.empty() || means.front().empty())
        throw InvalidInput("best_arm_in_hindsight: empty mean schedule");
    const std::size_t num_arms = means.front().size();
    std::vector<double> arm_sum(num_arms, 0.0);
    for (const auto& row : means) {
        if (row.size() != num_arms) throw InvalidInput("best_arm_in_hindsight: ragged mean schedule");
        for (std::size_t i = 0; i < num_arms; ++i) arm_sum[i] += row[i];
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < num_arms; ++i)
        if (arm_sum[i] < arm_sum[best]) best = i;  // strict: ties keep the lowest index
    return static_cast<int>(best) + 1;
}

}  // namespace htbandit
