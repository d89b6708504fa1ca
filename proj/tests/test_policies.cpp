#include <doctest.h>

#include <cmath>

#include "htbandit/envs.hpp"
#include "htbandit/policies.hpp"
#include "htbandit/tsallis.hpp"
#include "test_util.hpp"

using namespace htbandit;

TEST_CASE("htinf: first round plays the uniform point") {
    HtinfPolicy policy(4, HeavyTailParams(1.5, 2.0), 99);
    const auto c = policy.choose();
    for (int i = 0; i < 4; ++i) CHECK(c.x[i] == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(c.lambda == 1.0);
    CHECK_FALSE(c.epoch.has_value());
}

TEST_CASE("htinf threshold formula") {
    // sigma=1, alpha=2, t=4, x=0.25: theta_2 * 2 * 0.5 = theta_2.
    CHECK(htinf_threshold(HeavyTailParams(2.0, 1.0), 4, 0.25) ==
          doctest::Approx(theta_alpha(2.0)).epsilon(1e-12));
    CHECK(htinf_threshold(HeavyTailParams(2.0, 1.0), 4, 0.25) == doctest::Approx(0.206299).epsilon(1e-5));
    // Linear in sigma at fixed t, x.
    CHECK(htinf_threshold(HeavyTailParams(2.0, 3.0), 4, 0.25) ==
          doctest::Approx(3.0 * htinf_threshold(HeavyTailParams(2.0, 1.0), 4, 0.25)).epsilon(1e-12));
}

TEST_CASE("htinf: update arithmetic via full replay") {
    const HeavyTailParams params(2.0, 1.0);
    const auto env = make_stochastic({0.1, 0.3}, params, 300);
    HtinfPolicy policy(2, params, 4242);
    Rng env_rng(77);

    std::vector<double> replayed(2, 0.0);
    for (long t = 1; t <= 300; ++t) {
        const auto c = policy.choose();
        // The policy's point must be the argmin of the replayed estimates.
        const auto expected =
            ftrl_argmin(FtrlProblem(replayed, 1.0 / std::sqrt(static_cast<double>(t)), 2.0));
        for (int i = 0; i < 2; ++i) CHECK(c.x[i] == doctest::Approx(expected[i]).epsilon(1e-12));
        CHECK(c.threshold ==
              doctest::Approx(htinf_threshold(params, t, c.x[c.arm - 1])).epsilon(1e-12));

        const double loss = sample_loss(env.dist_at(t, c.arm), env_rng);
        const auto u = policy.update(loss);
        CHECK(u.skipped == (std::abs(loss) > c.threshold));
        if (!u.skipped) replayed[static_cast<std::size_t>(c.arm - 1)] += loss / c.x[c.arm - 1];
    }
    for (int i = 0; i < 2; ++i)
        CHECK(policy.cumulative_estimate()[static_cast<std::size_t>(i)] ==
              doctest::Approx(replayed[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("htinf: skipped and zero losses leave the estimate unchanged") {
    HtinfPolicy policy(2, HeavyTailParams(2.0, 1.0), 5);
    const auto c1 = policy.choose();
    policy.update(c1.threshold * 2.0);  // above the threshold: skipped
    CHECK(policy.cumulative_estimate()[0] == 0.0);
    CHECK(policy.cumulative_estimate()[1] == 0.0);

    policy.choose();
    policy.update(0.0);  // kept, but contributes nothing
    CHECK(policy.cumulative_estimate()[0] == 0.0);
    CHECK(policy.cumulative_estimate()[1] == 0.0);
}

TEST_CASE("policy protocol violations") {
    HtinfPolicy policy(2, HeavyTailParams(2.0, 1.0), 1);
    CHECK_THROWS_AS(policy.update(0.1), ProtocolViolation);
    policy.choose();
    CHECK_THROWS_AS(policy.choose(), ProtocolViolation);
    policy.update(0.0);

    AdatinfPolicy frozen(2, 2, 9);
    for (int t = 0; t < 2; ++t) {
        frozen.choose();
        frozen.update(0.05);
    }
    CHECK_THROWS_AS(frozen.choose(), ProtocolViolation);
}

TEST_CASE("opttinf is htinf with hyper-parameters (2, 1)") {
    auto opt = make_opttinf(3, 1234);
    HtinfPolicy ht(3, HeavyTailParams(2.0, 1.0), 1234);
    Rng losses(55);
    for (long t = 1; t <= 100; ++t) {
        const auto a = opt->choose();
        const auto b = ht.choose();
        CHECK(a.arm == b.arm);
        CHECK(a.threshold == b.threshold);
        for (int i = 0; i < 3; ++i) CHECK(a.x[i] == b.x[i]);
        // eta_t^(-1) = sqrt(t): the threshold is theta_2 * sqrt(t) * sqrt(x).
        CHECK(a.threshold == doctest::Approx(theta_alpha(2.0) * std::sqrt(double(t)) *
                                             std::sqrt(a.x[a.arm - 1]))
                                 .epsilon(1e-12));
        const double loss = losses.uniform() - 0.3;
        CHECK(opt->update(loss).skipped == ht.update(loss).skipped);
    }
}

TEST_CASE("baseline never skips and matches opttinf on small losses") {
    auto base = make_tsallis_inf_baseline(2, 777);
    auto opt = make_opttinf(2, 777);
    Rng losses(88);
    for (long t = 1; t <= 200; ++t) {
        const auto cb = base->choose();
        const auto co = opt->choose();
        CHECK(std::isinf(cb.threshold));
        for (int i = 0; i < 2; ++i) CHECK(cb.x[i] == co.x[i]);
        CHECK(cb.arm == co.arm);
        // Losses in [0, 0.1]: below every opttinf threshold at K=2, so the two
        // policies stay in lockstep and nobody skips.
        const double loss = 0.1 * losses.uniform();
        CHECK_FALSE(base->update(loss).skipped);
        CHECK_FALSE(opt->update(loss).skipped);
    }

    // The baseline keeps arbitrarily large losses.
    auto big = make_tsallis_inf_baseline(2, 1);
    big->choose();
    CHECK_FALSE(big->update(1e9).skipped);
}

TEST_CASE("adatinf: fresh state matches opttinf's first step") {
    AdatinfPolicy ada(4, 1000, 31337);
    auto opt = make_opttinf(4, 31337);
    const auto a = ada.choose();
    const auto o = opt->choose();
    CHECK(a.arm == o.arm);
    CHECK(a.lambda == 1.0);
    CHECK(a.epoch == 0);
    CHECK(a.threshold == doctest::Approx(o.threshold).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) CHECK(a.x[i] == doctest::Approx(o.x[i]).epsilon(1e-12));
}

TEST_CASE("adatinf threshold and cost formulas") {
    // J=3, t=4, x=0.25: 8 * theta_2 * 2 * 0.5.
    CHECK(adatinf_threshold(8.0, 4, 0.25) == doctest::Approx(8.0 * theta_alpha(2.0)).epsilon(1e-12));
    CHECK(adatinf_threshold(8.0, 4, 0.25) == doctest::Approx(1.65039).epsilon(1e-4));
    // Kept-round cost: lambda=1, t=4 (eta=1/2), x=0.25, loss=0.1 -> 2*0.5*2*0.01.
    CHECK(adatinf_kept_cost(1.0, 4, 0.25, 0.1) == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("adatinf: doubling fires per the hand trace (K=4, T=99)") {
    // sqrt(K(T+1)) = 20. A skipped loss of 25 at t=1 drives S_0 to 25 > 20,
    // so J jumps to max{1, ceil(log2(25/20)) + 1} = 2 and S is reseeded at 25.
    AdatinfPolicy policy(4, 99, 7);
    const auto c = policy.choose();
    CHECK(c.epoch == 0);
    const auto u = policy.update(25.0);
    CHECK(u.skipped);
    CHECK(u.cost == doctest::Approx(25.0));
    CHECK(policy.epoch_index() == 2);
    CHECK(policy.epoch_accumulator() == doctest::Approx(25.0));
}

TEST_CASE("adatinf: negative skipped cost lowers the accumulator and cannot double") {
    AdatinfPolicy policy(4, 99, 7);
    policy.choose();
    const auto u = policy.update(-0.5);  // |loss| above the first-round threshold
    CHECK(u.skipped);
    CHECK(u.cost == doctest::Approx(-0.5));
    CHECK(policy.epoch_index() == 0);
    CHECK(policy.epoch_accumulator() == doctest::Approx(-0.5));
}

TEST_CASE("adatinf: lambda doubles both learning rate and threshold") {
    // Force an epoch jump, then compare the threshold scale on the next round.
    AdatinfPolicy policy(2, 999, 11);
    policy.choose();
    policy.update(1000.0);  // huge skipped loss: jump well past J=1
    const int j = policy.epoch_index();
    CHECK(j > 1);
    const auto c = policy.choose();
    CHECK(c.lambda == doctest::Approx(std::exp2(double(j))));
    CHECK(c.threshold ==
          doctest::Approx(adatinf_threshold(c.lambda, 2, c.x[c.arm - 1])).epsilon(1e-12));
}

TEST_CASE("ada2tinf: restart schedule and inner horizons") {
    Ada2tinfPolicy policy(3, 4141);
    std::vector<long> horizons;
    for (long t = 1; t <= 30; ++t) {
        policy.choose();
        if (!policy.restart_rounds().empty() && policy.restart_rounds().back() == t)
            horizons.push_back(policy.current_inner_horizon());
        policy.update(0.01);
    }
    CHECK(policy.restart_rounds() == std::vector<long>{1, 2, 5, 12, 27});
    CHECK(horizons == std::vector<long>{1, 3, 7, 15, 31});
}

TEST_CASE("ada2tinf: delegates to a standalone instance within a super-epoch") {
    const int num_arms = 3;
    Ada2tinfPolicy wrapper(num_arms, 2024);
    Rng losses(5150);
    std::vector<double> fed;
    for (long t = 1; t <= 11; ++t) fed.push_back(0.2 * losses.uniform() - 0.05);

    std::vector<ChooseResult> wrapper_rounds;
    for (long t = 1; t <= 11; ++t) {
        wrapper_rounds.push_back(wrapper.choose());
        wrapper.update(fed[static_cast<std::size_t>(t - 1)]);
    }

    // Rounds 5..11 are the third super-epoch: horizon 7, derived seed index 3.
    AdatinfPolicy standalone(num_arms, 7, Ada2tinfPolicy::inner_seed(2024, 3));
    for (long t = 5; t <= 11; ++t) {
        const auto expected = standalone.choose();
        const auto& got = wrapper_rounds[static_cast<std::size_t>(t - 1)];
        CHECK(got.arm == expected.arm);
        CHECK(got.lambda == expected.lambda);
        CHECK(got.threshold == doctest::Approx(expected.threshold).epsilon(1e-12));
        for (int i = 0; i < num_arms; ++i)
            CHECK(got.x[i] == doctest::Approx(expected.x[i]).epsilon(1e-12));
        standalone.update(fed[static_cast<std::size_t>(t - 1)]);
    }
}

TEST_CASE("skip rate stays under the summed Markov bounds") {
    // Pr{skip | x_t} <= sigma^alpha / r_t^alpha, so the skip count cannot
    // exceed the summed per-round bounds by more than five standard deviations.
    for (double alpha : {1.5, 2.0}) {
        const HeavyTailParams params(alpha, 1.0);
        const auto env = make_stochastic({0.1, 0.3}, params, 3000);
        HtinfPolicy policy(2, params, 90210);
        Rng env_rng(617);
        double bound_sum = 0.0;
        long skips = 0;
        for (long t = 1; t <= env.horizon(); ++t) {
            const auto c = policy.choose();
            bound_sum += std::min(1.0, std::pow(c.threshold, -alpha));
            if (policy.update(sample_loss(env.dist_at(t, c.arm), env_rng)).skipped) ++skips;
        }
        CHECK(static_cast<double>(skips) <= bound_sum + 5.0 * std::sqrt(bound_sum));
    }
}

TEST_CASE("importance-sampled estimates are unbiased for the truncated means") {
    // x fixed, thresholds per arm from the round-1 rule; the Monte-Carlo mean
    // of each component must land within four standard errors of the analytic
    // truncated mean.
    const HeavyTailParams params(2.0, 1.0);
    const auto env = make_stochastic({0.1, 0.25, 0.4}, params, 1);
    const std::vector<double> x{0.2, 0.5, 0.3};
    const long t = 25;

    Rng rng(31415);
    const int draws = 1'000'000;
    std::vector<double> sum(3, 0.0), sum_sq(3, 0.0);
    for (int n = 0; n < draws; ++n) {
        const double u = rng.uniform();
        int arm = 3;
        double c = 0.0;
        for (int i = 0; i < 3; ++i) {
            c += x[static_cast<std::size_t>(i)];
            if (u < c) {
                arm = i + 1;
                break;
            }
        }
        const double loss = sample_loss(env.dist_at(1, arm), rng);
        const double r = htinf_threshold(params, t, x[static_cast<std::size_t>(arm - 1)]);
        const double est = std::abs(loss) <= r ? loss / x[static_cast<std::size_t>(arm - 1)] : 0.0;
        sum[static_cast<std::size_t>(arm - 1)] += est;
        sum_sq[static_cast<std::size_t>(arm - 1)] += est * est;
    }
    for (int i = 0; i < 3; ++i) {
        const double r = htinf_threshold(params, t, x[static_cast<std::size_t>(i)]);
        const double expected = truncated_mean(env.dist_at(1, i + 1), r);
        const double mc_mean = sum[static_cast<std::size_t>(i)] / draws;
        const double mc_var =
            sum_sq[static_cast<std::size_t>(i)] / draws - mc_mean * mc_mean;
        const double se = std::sqrt(std::max(mc_var, 1e-12) / draws);
        CHECK(std::abs(mc_mean - expected) <= 4.0 * se + 1e-9);
    }
}

TEST_CASE("policy determinism: identical seeds give identical runs") {
    for (int variant = 0; variant < 2; ++variant) {
        auto make = [&](std::uint64_t seed) -> std::unique_ptr<Policy> {
            if (variant == 0) return std::make_unique<HtinfPolicy>(3, HeavyTailParams(1.7, 0.8), seed);
            return std::make_unique<AdatinfPolicy>(3, 500, seed);
        };
        auto a = make(12345);
        auto b = make(12345);
        Rng losses(999);
        for (long t = 1; t <= 200; ++t) {
            const auto ca = a->choose();
            const auto cb = b->choose();
            CHECK(ca.arm == cb.arm);
            CHECK(ca.threshold == cb.threshold);
            const double loss = 3.0 * losses.uniform() - 1.0;
            const auto ua = a->update(loss);
            const auto ub = b->update(loss);
            CHECK(ua.skipped == ub.skipped);
            if (ua.cost || ub.cost) CHECK(*ua.cost == *ub.cost);
        }
    }
}
