#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "htbandit/errors.hpp"

namespace htbandit {

// Heavy-tail parameters (alpha, sigma): the alpha-th absolute moment of every
// loss distribution is bounded by sigma^alpha, with 1 < alpha <= 2.
struct HeavyTailParams {
    double alpha;
    double sigma;

    HeavyTailParams(double alpha_, double sigma_) : alpha(alpha_), sigma(sigma_) {
        if (!(alpha > 1.0) || !(alpha <= 2.0))
            throw InvalidInput("alpha must lie in (1, 2]");
        if (!(sigma > 0.0)) throw InvalidInput("sigma must be > 0");
    }
};

// A point on the probability simplex over K arms. Interior points have all
// weights strictly positive and summing to 1 within 1e-9; one-hot points are
// the only ones permitted to carry zeros and are flagged as such.
class SimplexPoint {
public:
    SimplexPoint() = default;

    static SimplexPoint interior(std::vector<double> weights);
    static SimplexPoint one_hot(int num_arms, int arm);  // arm is 1-based

    int size() const { return static_cast<int>(w_.size()); }
    double operator[](int i) const { return w_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& weights() const { return w_; }
    bool is_one_hot() const { return one_hot_; }

private:
    std::vector<double> w_;
    bool one_hot_ = false;
};

// Per-round trace entry. Arms and rounds are 1-based. lambda is the learning
// rate multiplier (1 except under the adaptive doubling policy); cost/epoch
// are present only for traces of that policy.
struct RoundRecord {
    long t = 0;
    SimplexPoint x;
    int arm = 0;
    double loss = 0.0;
    double threshold = 0.0;
    bool skipped = false;
    double lambda = 1.0;
    std::optional<double> cost;
    std::optional<int> epoch;
};

struct CheckpointStat {
    long t = 0;
    double mean_regret = 0.0;
    double std_error = 0.0;
};

// Aggregated pseudo-regret curve over replicates. Checkpoints are strictly
// increasing and the last one sits at the horizon.
struct RegretSeries {
    long horizon = 0;
    int replicates = 0;
    std::vector<CheckpointStat> checkpoints;

    void validate() const;
};

using MeanSchedule = std::vector<std::vector<double>>;  // T rows of K true means

// Pseudo-regret of a played trace against the best fixed arm in hindsight,
// computed from the true per-round means (no sampled losses). Ties in the
// comparator go to the lowest arm index.
double pseudo_regret(const std::vector<RoundRecord>& trace, const MeanSchedule& means);

// Arm (1-based) minimizing the summed true means; lowest index on ties.
int best_arm_in_hindsight(const MeanSchedule& means);

}  // namespace htbandit
