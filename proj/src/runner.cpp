#include "htbandit/runner.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "htbandit/tsallis.hpp"

namespace htbandit {

EpisodeTrace run_episode(const PolicySpec& policy_spec, const EnvironmentSpec& env,
                         std::uint64_t seed) {
    auto policy = make_policy(policy_spec, env.num_arms(), env.horizon(),
                              derive_seed(seed, kPolicyStream));
    Rng env_rng(derive_seed(seed, kEnvStream));

    EpisodeTrace trace;
    trace.policy_name = std::string(policy->name());
    trace.policy_alpha = policy->hyper_params().alpha;
    trace.policy_sigma = policy->hyper_params().sigma;
    trace.env_fingerprint = env.fingerprint();
    trace.seed = seed;
    trace.records.reserve(static_cast<std::size_t>(env.horizon()));

    for (long t = 1; t <= env.horizon(); ++t) {
        ChooseResult c = policy->choose();
        const double loss = sample_loss(env.dist_at(t, c.arm), env_rng);
        const UpdateResult u = policy->update(loss);

        RoundRecord rec;
        rec.t = t;
        rec.x = std::move(c.x);
        rec.arm = c.arm;
        rec.loss = loss;
        rec.threshold = c.threshold;
        rec.skipped = u.skipped;
        rec.lambda = c.lambda;
        rec.cost = u.cost;
        rec.epoch = c.epoch;
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

std::vector<double> checkpoint_regrets(const EpisodeTrace& trace, const EnvironmentSpec& env,
                                       const std::vector<long>& checkpoints) {
    const int num_arms = env.num_arms();
    std::vector<double> arm_sum(static_cast<std::size_t>(num_arms), 0.0);
    double played = 0.0;
    std::vector<double> out;
    out.reserve(checkpoints.size());

    std::size_t next = 0;
    for (const RoundRecord& rec : trace.records) {
        played += env.mean_at(rec.t, rec.arm);
        for (int i = 1; i <= num_arms; ++i)
            arm_sum[static_cast<std::size_t>(i - 1)] += env.mean_at(rec.t, i);
        while (next < checkpoints.size() && checkpoints[next] == rec.t) {
            double best = arm_sum[0];
            for (double s : arm_sum) best = std::min(best, s);
            out.push_back(played - best);
            ++next;
        }
    }
    if (next != checkpoints.size())
        throw InvalidInput("checkpoint beyond the trace length");
    return out;
}

RegretSeries run_experiment(const ExperimentSpec& spec, const EnvironmentSpec& env,
                            const TraceSink& sink) {
    if (spec.replicates < 1) throw InvalidInput("need at least one replicate");
    long prev = 0;
    for (long c : spec.checkpoints) {
        if (c <= prev || c > env.horizon()) throw InvalidInput("checkpoints must be strictly increasing and within the horizon");
        prev = c;
    }
    if (env.horizon() > 0 && (spec.checkpoints.empty() || spec.checkpoints.back() != env.horizon()))
        throw InvalidInput("last checkpoint must sit at the horizon");
    if (spec.policy.kind == PolicyKind::Htinf && !spec.policy.params)
        throw InvalidInput("htinf requires heavy-tail hyper-parameters");

    const int replicates = spec.replicates;
    std::vector<std::vector<double>> per_replicate(static_cast<std::size_t>(replicates));

    int threads = spec.max_threads;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, replicates));

    std::atomic<int> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const int r = cursor.fetch_add(1);
            if (r >= replicates) return;
            try {
                const std::uint64_t seed = derive_seed(spec.base_seed, static_cast<std::uint64_t>(r));
                EpisodeTrace trace = run_episode(spec.policy, env, seed);
                per_replicate[static_cast<std::size_t>(r)] =
                    checkpoint_regrets(trace, env, spec.checkpoints);
                if (sink) sink(r, trace);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    RegretSeries series;
    series.horizon = env.horizon();
    series.replicates = replicates;
    series.checkpoints.reserve(spec.checkpoints.size());
    for (std::size_t c = 0; c < spec.checkpoints.size(); ++c) {
        double mean = 0.0;
        for (int r = 0; r < replicates; ++r) mean += per_replicate[static_cast<std::size_t>(r)][c];
        mean /= replicates;
        double var = 0.0;
        for (int r = 0; r < replicates; ++r) {
            const double d = per_replicate[static_cast<std::size_t>(r)][c] - mean;
            var += d * d;
        }
        const double std_error =
            replicates > 1 ? std::sqrt(var / (replicates - 1)) / std::sqrt(double(replicates)) : 0.0;
        series.checkpoints.push_back({spec.checkpoints[c], mean, std_error});
    }
    series.validate();
    return series;
}

RegretDecomposition decompose_regret(const EpisodeTrace& trace, const EnvironmentSpec& env) {
    RegretDecomposition out;
    if (trace.records.empty()) return out;
    if (static_cast<long>(trace.records.size()) > env.horizon())
        throw InvalidInput("trace longer than the environment horizon");

    MeanSchedule means;
    means.reserve(trace.records.size());
    for (const RoundRecord& rec : trace.records) {
        std::vector<double> row(static_cast<std::size_t>(env.num_arms()));
        for (int i = 1; i <= env.num_arms(); ++i) row[static_cast<std::size_t>(i - 1)] = env.mean_at(rec.t, i);
        means.push_back(std::move(row));
    }
    const int star = best_arm_in_hindsight(means);

    for (const RoundRecord& rec : trace.records) {
        for (int i = 1; i <= env.num_arms(); ++i) {
            // Threshold this arm would have realized: r_t scales as x^(1/alpha).
            const double r_i = std::isinf(rec.threshold)
                                   ? rec.threshold
                                   : rec.threshold * std::pow(rec.x[i - 1] / rec.x[rec.arm - 1],
                                                              1.0 / trace.policy_alpha);
            const double gap_i = means[static_cast<std::size_t>(rec.t - 1)][static_cast<std::size_t>(i - 1)] -
                                 truncated_mean(env.dist_at(rec.t, i), r_i);
            const double weight = rec.x[i - 1] - (i == star ? 1.0 : 0.0);
            out.skipping_gap += weight * gap_i;
        }
        if (!rec.skipped) {
            const double estimate = rec.loss / rec.x[rec.arm - 1];
            out.ftrl_error += estimate * (rec.x[rec.arm - 1] - (rec.arm == star ? 1.0 : 0.0));
        }
    }
    return out;
}

FtrlDecomposition ftrl_decomposition(const EpisodeTrace& trace, int comparator_arm) {
    if (trace.policy_name == "ada2tinf")
        throw InvalidInput("ftrl_decomposition: restarted traces are not a single FTRL run");
    FtrlDecomposition out;
    if (trace.records.empty()) return out;
    const int num_arms = trace.records.front().x.size();
    if (comparator_arm < 1 || comparator_arm > num_arms)
        throw InvalidInput("ftrl_decomposition: comparator arm out of range");

    const double alpha = trace.policy_alpha;
    const double sigma = trace.policy_sigma;
    double prev_eta_inv = 0.0;
    for (const RoundRecord& rec : trace.records) {
        const double eta_inv =
            sigma * std::pow(static_cast<double>(rec.t), 1.0 / alpha) * rec.lambda;
        out.part_a += (eta_inv - prev_eta_inv) * (-alpha - tsallis_potential(rec.x, alpha));
        prev_eta_inv = eta_inv;

        if (!rec.skipped) {
            const double estimate = rec.loss / rec.x[rec.arm - 1];
            out.lhs += estimate * (rec.x[rec.arm - 1] - (rec.arm == comparator_arm ? 1.0 : 0.0));

            // Drifted loss vector lhat_t - loss * 1.
            std::vector<double> drifted(static_cast<std::size_t>(num_arms), -rec.loss);
            drifted[static_cast<std::size_t>(rec.arm - 1)] += estimate;
            const auto z = conjugate_step(rec.x, 1.0 / eta_inv, alpha, drifted);
            out.part_b += eta_inv * bregman_divergence(rec.x, z, alpha);
        }
    }
    return out;
}

EpochAuditSummary audit_epochs(const EpisodeTrace& trace) {
    if (trace.policy_name != "adatinf")
        throw InvalidInput("audit_epochs expects a trace of the horizon-aware adaptive policy");
    if (trace.records.empty()) return {};

    const int num_arms = trace.records.front().x.size();
    const long horizon = static_cast<long>(trace.records.size());
    const double root = std::sqrt(static_cast<double>(num_arms) * static_cast<double>(horizon + 1));
    const double tol = 1e-9;

    int epoch = 0;
    double acc = 0.0;        // replayed S_J, seed included
    double epoch_sum = 0.0;  // sum of c_t over the current epoch's own rounds
    long doublings = 0;

    for (const RoundRecord& rec : trace.records) {
        const double lambda = std::exp2(static_cast<double>(epoch));
        if (std::abs(rec.lambda - lambda) > tol * lambda)
            throw AuditFailure("epoch audit: lambda mismatch at round " + std::to_string(rec.t));
        if (!rec.cost || !rec.epoch || *rec.epoch != epoch)
            throw AuditFailure("epoch audit: epoch bookkeeping mismatch at round " +
                               std::to_string(rec.t));

        const double expect_r = adatinf_threshold(lambda, rec.t, rec.x[rec.arm - 1]);
        if (std::abs(rec.threshold - expect_r) > tol * std::max(1.0, expect_r))
            throw AuditFailure("epoch audit: threshold mismatch at round " + std::to_string(rec.t));

        const double c = rec.skipped
                             ? rec.loss
                             : adatinf_kept_cost(lambda, rec.t, rec.x[rec.arm - 1], rec.loss);
        if (std::abs(c - *rec.cost) > tol * std::max(1.0, std::abs(c)))
            throw AuditFailure("epoch audit: cost mismatch at round " + std::to_string(rec.t));

        acc += c;
        epoch_sum += c;
        if (lambda * root < acc) {
            // Epoch `epoch` closes here; the two closed-epoch inequalities.
            if (acc - c > lambda * root + tol)
                throw AuditFailure("epoch audit: pre-close accumulator above the budget in epoch " +
                                   std::to_string(epoch));
            if (!(epoch_sum > 0.5 * lambda * root - tol))
                throw AuditFailure("epoch audit: closed epoch " + std::to_string(epoch) +
                                   " did not exceed half its budget");
            int jump = epoch + 1;
            if (c > 0.0) {
                int k = static_cast<int>(std::ceil(std::log2(c / root)));
                while (std::exp2(static_cast<double>(k)) < c / root) ++k;
                while (std::exp2(static_cast<double>(k - 1)) >= c / root) --k;
                jump = std::max(jump, k + 1);
            }
            epoch = jump;
            acc = c;
            epoch_sum = 0.0;
            ++doublings;
        }
    }
    if (acc > std::exp2(static_cast<double>(epoch)) * root + tol)
        throw AuditFailure("epoch audit: final epoch " + std::to_string(epoch) +
                           " accumulator above its budget");
    return {epoch, doublings};
}

bool gap_bound_applicable(double alpha) { return alpha >= kGapBoundMinAlpha; }

namespace {

double sum_delta_pow(const GapProfile& gaps, double exponent) {
    double s = 0.0;
    for (std::size_t i = 0; i < gaps.deltas.size(); ++i)
        if (static_cast<int>(i) + 1 != gaps.optimal_arm) s += std::pow(gaps.deltas[i], exponent);
    return s;
}

}  // namespace

double bound_htinf_adversarial(double alpha, double sigma, int num_arms, long horizon) {
    return 30.0 * sigma * std::pow(static_cast<double>(num_arms), 1.0 - 1.0 / alpha) *
           std::pow(static_cast<double>(horizon + 1), 1.0 / alpha);
}

double bound_htinf_gap(double alpha, double sigma, const GapProfile& gaps, long horizon) {
    const double c = (2.0 * alpha - 2.0) / alpha * std::pow(alpha / 2.0, -1.0 / (alpha - 1.0)) *
                     std::pow(30.0 * sigma / alpha, alpha / (alpha - 1.0));
    return c * sum_delta_pow(gaps, -1.0 / (alpha - 1.0)) * std::log(static_cast<double>(horizon + 1));
}

double bound_opttinf_adversarial(double alpha, double sigma, int num_arms, long horizon) {
    return 26.0 * std::pow(sigma, alpha) * std::pow(static_cast<double>(num_arms), (alpha - 1.0) / 2.0) *
               std::pow(static_cast<double>(horizon + 1), (3.0 - alpha) / 2.0) +
           4.0 * std::sqrt(static_cast<double>(num_arms) * static_cast<double>(horizon + 1));
}

double bound_opttinf_gap(double alpha, double sigma, const GapProfile& gaps, long horizon) {
    const double log_term = std::log(static_cast<double>(horizon + 1));
    const double sig = std::pow(sigma, 2.0 * alpha / (alpha - 1.0));
    const double delta_sum = sum_delta_pow(gaps, (alpha - 3.0) / (alpha - 1.0));
    const double first = 2.0 * std::pow(4.0, (3.0 - alpha) / (alpha - 1.0)) *
                         std::pow(5.0, 2.0 / (alpha - 1.0)) * sig * delta_sum * log_term;
    const double second = 32.0 * sigma / (alpha - 1.0) * sum_delta_pow(gaps, -1.0) * log_term;
    const double third = 2.0 * std::pow(8.0, 2.0 / (alpha - 1.0)) *
                         std::pow(4.0, (3.0 - alpha) / (alpha - 1.0)) * sig * delta_sum * log_term;
    return first + second + third;
}

double bound_adatinf(double alpha, double sigma, int num_arms, long horizon) {
    return 3.0 * std::sqrt(static_cast<double>(num_arms) * static_cast<double>(horizon + 1)) +
           204.0 * sigma * std::pow(static_cast<double>(num_arms), 1.0 - 1.0 / alpha) *
               std::pow(static_cast<double>(horizon + 1), 1.0 / alpha) +
           12.0 * sigma * std::pow(static_cast<double>(horizon), 1.0 / alpha);
}

double bound_ada2tinf(double alpha, double sigma, int num_arms, long horizon) {
    return 600.0 * sigma * std::pow(static_cast<double>(num_arms), 1.0 - 1.0 / alpha) *
           std::pow(static_cast<double>(horizon), 1.0 / alpha);
}

std::vector<BoundReport> bound_report(const RegretSeries& series, const EnvironmentSpec& env,
                                      PolicyKind kind) {
    if (series.checkpoints.empty()) throw InvalidInput("bound_report: empty regret series");
    if (!env.tail_params())
        throw InvalidInput("bound_report: environment carries no declared tail parameters");
    const HeavyTailParams& tail = *env.tail_params();
    const double measured =
        series.checkpoints.back().mean_regret + 3.0 * series.checkpoints.back().std_error;
    const long horizon = series.horizon;
    const int num_arms = env.num_arms();

    auto entry = [&](const char* name, double value) {
        return BoundReport{name, measured, value, measured <= value};
    };

    std::vector<BoundReport> out;
    switch (kind) {
        case PolicyKind::Htinf:
            out.push_back(entry("ThmA1-adv", bound_htinf_adversarial(tail.alpha, tail.sigma, num_arms, horizon)));
            if (env.gap_profile() && gap_bound_applicable(tail.alpha))
                out.push_back(entry("ThmA1-sto", bound_htinf_gap(tail.alpha, tail.sigma, *env.gap_profile(), horizon)));
            break;
        case PolicyKind::Opttinf:
            out.push_back(entry("ThmB1-adv", bound_opttinf_adversarial(tail.alpha, tail.sigma, num_arms, horizon)));
            if (env.gap_profile() && gap_bound_applicable(tail.alpha))
                out.push_back(entry("ThmB1-sto", bound_opttinf_gap(tail.alpha, tail.sigma, *env.gap_profile(), horizon)));
            break;
        case PolicyKind::Adatinf:
            out.push_back(entry("ThmC1", bound_adatinf(tail.alpha, tail.sigma, num_arms, horizon)));
            break;
        case PolicyKind::Ada2tinf:
        case PolicyKind::TsallisInf:
            break;
    }
    return out;
}

}  // namespace htbandit
