#include <doctest.h>

#include <cmath>

#include "htbandit/tsallis.hpp"
#include "test_util.hpp"

using namespace htbandit;
using htbtest::ftrl_objective;
using htbtest::grid_search_simplex;

TEST_CASE("tsallis potential: one-hot points evaluate to -alpha") {
    for (double alpha : {1.1, 1.5, 1.9, 2.0}) {
        const auto y = SimplexPoint::one_hot(5, 3);
        CHECK(tsallis_potential(y, alpha) == doctest::Approx(-alpha).epsilon(1e-12));
    }
}

TEST_CASE("tsallis potential: uniform point") {
    std::vector<double> w(4, 0.25);
    const auto x = SimplexPoint::interior(w);
    CHECK(tsallis_potential(x, 2.0) == doctest::Approx(-4.0).epsilon(1e-12));

    // General K and alpha: closed form -alpha * K^(1 - 1/alpha) against the sum.
    for (int k : {2, 3, 7, 16}) {
        for (double alpha : {1.25, 1.6, 2.0}) {
            const auto u = SimplexPoint::interior(std::vector<double>(k, 1.0 / k));
            const double expected = -alpha * std::pow(static_cast<double>(k), 1.0 - 1.0 / alpha);
            CHECK(tsallis_potential(u, alpha) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("theta_alpha: pinned values and range") {
    CHECK(theta_alpha(2.0) == doctest::Approx(1.0 - std::exp2(-1.0 / 3.0)).epsilon(1e-15));
    CHECK(theta_alpha(2.0) == doctest::Approx(0.2062994740159).epsilon(1e-10));

    // alpha = 1.5: first branch 1 - 2^(-1/4), second (2/3)^2; min is the first.
    CHECK(theta_alpha(1.5) == doctest::Approx(1.0 - std::exp2(-0.25)).epsilon(1e-15));
    CHECK(theta_alpha(1.5) == doctest::Approx(0.1591035847463).epsilon(1e-10));
    CHECK(std::exp(std::log(2.0 - 2.0 / 1.5) / 0.5) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));

    for (int i = 1; i <= 1000; ++i) {
        const double alpha = 1.0 + i / 1000.0;
        const double theta = theta_alpha(alpha);
        CHECK(theta > 0.0);
        CHECK(theta < 1.0);
    }

    CHECK_THROWS_AS(theta_alpha(1.0), InvalidInput);
    CHECK_THROWS_AS(theta_alpha(2.5), InvalidInput);
}

TEST_CASE("ftrl_argmin: zero losses give the uniform point") {
    for (int k : {2, 3, 6}) {
        for (double eta : {0.05, 1.0, 7.0}) {
            for (double alpha : {1.2, 1.5, 2.0}) {
                const auto x = ftrl_argmin(FtrlProblem(std::vector<double>(k, 0.0), eta, alpha));
                for (int i = 0; i < k; ++i)
                    CHECK(x[i] == doctest::Approx(1.0 / k).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("ftrl_argmin: closed-form two-arm instance") {
    // eta=1, alpha=2, L=(0, 5/12): multiplier 1.25 gives x=(0.64, 0.36) exactly.
    const auto x = ftrl_argmin(FtrlProblem({0.0, 5.0 / 12.0}, 1.0, 2.0));
    CHECK(x[0] == doctest::Approx(0.64).epsilon(1e-10));
    CHECK(x[1] == doctest::Approx(0.36).epsilon(1e-10));

    // Independent oracle: exhaustive grid over the 1-simplex at step 1e-6.
    const auto grid = grid_search_simplex({0.0, 5.0 / 12.0}, 1.0, 2.0, 1e-6);
    CHECK(std::abs(grid.x[0] - 0.64) < 2e-6);
    const double solver_value = ftrl_objective({0.0, 5.0 / 12.0}, 1.0, 2.0, x.weights());
    CHECK(solver_value <= grid.value + 1e-12);
}

TEST_CASE("ftrl_argmin: output is an interior simplex point") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 7);
        std::vector<double> loss(static_cast<std::size_t>(k));
        for (auto& v : loss) v = htbtest::uniform_in(rng, -20.0, 20.0);
        const double eta = htbtest::uniform_in(rng, 0.01, 3.0);
        const double alpha = htbtest::uniform_in(rng, 1.05, 2.0);
        const auto x = ftrl_argmin(FtrlProblem(loss, eta, alpha));
        double sum = 0.0;
        for (int i = 0; i < k; ++i) {
            CHECK(x[i] > 0.0);
            sum += x[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("ftrl_argmin: translation invariance") {
    Rng rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 4);
        std::vector<double> loss(static_cast<std::size_t>(k));
        for (auto& v : loss) v = htbtest::uniform_in(rng, -5.0, 5.0);
        const double eta = htbtest::uniform_in(rng, 0.05, 2.0);
        const double alpha = htbtest::uniform_in(rng, 1.1, 2.0);
        const double shift = htbtest::uniform_in(rng, -10.0, 10.0);

        const auto x = ftrl_argmin(FtrlProblem(loss, eta, alpha));
        std::vector<double> shifted = loss;
        for (auto& v : shifted) v += shift;
        const auto y = ftrl_argmin(FtrlProblem(shifted, eta, alpha));
        for (int i = 0; i < k; ++i) CHECK(std::abs(x[i] - y[i]) <= 1e-8);
    }
}

TEST_CASE("ftrl_argmin: raising one arm's loss moves mass away from it") {
    Rng rng(37);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 4);
        std::vector<double> loss(static_cast<std::size_t>(k));
        for (auto& v : loss) v = htbtest::uniform_in(rng, -3.0, 3.0);
        const double eta = htbtest::uniform_in(rng, 0.1, 1.5);
        const double alpha = htbtest::uniform_in(rng, 1.1, 2.0);
        const int bumped = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k));
        const double bump = htbtest::uniform_in(rng, 0.1, 2.0);

        const auto x = ftrl_argmin(FtrlProblem(loss, eta, alpha));
        std::vector<double> raised = loss;
        raised[static_cast<std::size_t>(bumped)] += bump;
        const auto y = ftrl_argmin(FtrlProblem(raised, eta, alpha));

        CHECK(y[bumped] < x[bumped]);
        for (int i = 0; i < k; ++i)
            if (i != bumped) CHECK(y[i] >= x[i] - 1e-12);
    }
}

TEST_CASE("ftrl_argmin: grid-search oracle equivalence") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = (trial % 2 == 0) ? 2 : 3;
        std::vector<double> loss(static_cast<std::size_t>(k));
        for (auto& v : loss) v = htbtest::uniform_in(rng, 0.0, 5.0);
        const double eta = htbtest::uniform_in(rng, 0.05, 2.0);
        const double alpha = htbtest::uniform_in(rng, 1.1, 2.0);

        const auto x = ftrl_argmin(FtrlProblem(loss, eta, alpha));
        const auto grid = grid_search_simplex(loss, eta, alpha, 1e-3);
        const double solver_value = ftrl_objective(loss, eta, alpha, x.weights());
        CHECK(solver_value <= grid.value + 1e-6);
        for (int i = 0; i < k; ++i) CHECK(std::abs(x[i] - grid.x[static_cast<std::size_t>(i)]) <= 1e-3);
    }
}

TEST_CASE("ftrl_argmin: input validation") {
    CHECK_THROWS_AS(FtrlProblem({0.0}, 1.0, 2.0), InvalidInput);          // K < 2
    CHECK_THROWS_AS(FtrlProblem({0.0, 1.0}, 0.0, 2.0), InvalidInput);     // eta
    CHECK_THROWS_AS(FtrlProblem({0.0, 1.0}, 1.0, 1.0), InvalidInput);     // alpha
    CHECK_THROWS_AS(FtrlProblem({0.0, 1.0 / 0.0}, 1.0, 2.0), InvalidInput);
}

TEST_CASE("conjugate_step: zero drift is the identity") {
    const auto x = SimplexPoint::interior({0.3, 0.2, 0.5});
    const auto z = conjugate_step(x, 1.7, 1.6, {0.0, 0.0, 0.0});
    for (int i = 0; i < 3; ++i) CHECK(z[static_cast<std::size_t>(i)] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("conjugate_step: two-arm example against finite-difference inversion") {
    const auto x = SimplexPoint::interior({0.5, 0.5});
    const auto z = conjugate_step(x, 1.0, 2.0, {0.1, 0.0});
    // (0.5^(-1/2) + 0.1)^(-2) = 0.43613982...
    CHECK(z[0] == doctest::Approx(0.4361398165514).epsilon(1e-9));
    CHECK(z[1] == doctest::Approx(0.5).epsilon(1e-12));

    // Oracle: grad Psi via central differences of the raw potential; solve
    // grad Psi(z)_i = grad Psi(x)_i - eta*v_i by scalar bisection.
    const std::vector<double> v{0.1, 0.0};
    for (std::size_t i = 0; i < 2; ++i) {
        const double target = htbtest::fd_grad_psi(x.weights(), 2.0, i) - 1.0 * v[i];
        double lo = 1e-6, hi = 1.0;
        for (int iter = 0; iter < 200; ++iter) {
            const double mid = 0.5 * (lo + hi);
            std::vector<double> probe = x.weights();
            probe[i] = mid;
            // grad Psi is increasing in the component value (concave potential).
            if (htbtest::fd_grad_psi(probe, 2.0, i) < target)
                lo = mid;
            else
                hi = mid;
        }
        CHECK(z[i] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-5));
    }
}

TEST_CASE("conjugate_step: rejects steps that leave the domain") {
    const auto x = SimplexPoint::interior({0.9, 0.1});
    CHECK_THROWS_AS(conjugate_step(x, 1.0, 2.0, {-10.0, 0.0}), NumericFailure);
}

TEST_CASE("conjugate_step: gradient round trip") {
    Rng rng(59);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 4);
        const auto x = SimplexPoint::interior(htbtest::random_interior_point(rng, k));
        const double alpha = htbtest::uniform_in(rng, 1.1, 2.0);
        const double eta = htbtest::uniform_in(rng, 0.05, 1.0);
        const double q = (alpha - 1.0) / alpha;
        std::vector<double> v(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < v.size(); ++i) {
            // Keep the base positive: |eta v| below the smallest x^(-q).
            const double cap = 0.5 * std::pow(x[static_cast<int>(i)], -q) / eta;
            v[i] = htbtest::uniform_in(rng, -cap, cap);
        }
        const auto z = conjugate_step(x, eta, alpha, v);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double recovered = std::pow(z[i], -q);
            const double expected = std::pow(x[static_cast<int>(i)], -q) + eta * v[i];
            CHECK(std::abs(recovered - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("conjugate_step: multiplicative bound on legal skipped-rule inputs") {
    // For kept rounds fed the drifted estimator, every component of z stays
    // within the 2^(alpha/(2alpha-1)) multiple of x.
    Rng rng(61);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 5);
        const auto x = SimplexPoint::interior(htbtest::random_interior_point(rng, k));
        const double alpha = htbtest::uniform_in(rng, 1.05, 2.0);
        const double sigma = htbtest::uniform_in(rng, 0.2, 3.0);
        const long t = 1 + static_cast<long>(rng.next_u64() % 1000);
        const double eta = 1.0 / (sigma * std::pow(static_cast<double>(t), 1.0 / alpha));
        const int arm = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k));
        const double r = theta_alpha(alpha) / eta * std::pow(x[arm - 1], 1.0 / alpha);
        const double loss = htbtest::uniform_in(rng, -r, r);

        std::vector<double> drifted(static_cast<std::size_t>(k), -loss);
        drifted[static_cast<std::size_t>(arm - 1)] += loss / x[arm - 1];
        const auto z = conjugate_step(x, eta, alpha, drifted);
        const double factor = std::exp2(alpha / (2.0 * alpha - 1.0));
        for (int i = 0; i < k; ++i) CHECK(z[static_cast<std::size_t>(i)] <= factor * x[i] * (1.0 + 1e-9));
    }
}

TEST_CASE("bregman divergence: zero iff equal, nonnegative, independent coding") {
    const auto x = SimplexPoint::interior({0.5, 0.5});
    CHECK(bregman_divergence(x, {0.5, 0.5}, 2.0) == doctest::Approx(0.0).epsilon(1e-15));

    // Two independent codings of D(x, z) for z = (0.25, 0.25).
    const std::vector<double> z{0.25, 0.25};
    const double direct = bregman_divergence(x, z, 2.0);
    double oracle = htbtest::psi_raw(x.weights(), 2.0) - htbtest::psi_raw(z, 2.0);
    for (std::size_t i = 0; i < z.size(); ++i)
        oracle -= htbtest::fd_grad_psi(z, 2.0, i) * (x[static_cast<int>(i)] - z[i]);
    CHECK(direct == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(direct >= 0.0);

    Rng rng(73);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 4);
        const auto a = SimplexPoint::interior(htbtest::random_interior_point(rng, k));
        std::vector<double> b(static_cast<std::size_t>(k));
        for (auto& v : b) v = htbtest::uniform_in(rng, 0.01, 1.5);
        const double alpha = htbtest::uniform_in(rng, 1.1, 2.0);
        CHECK(bregman_divergence(a, b, alpha) >= 0.0);
    }

    CHECK_THROWS_AS(bregman_divergence(x, {0.0, 0.5}, 2.0), InvalidInput);
}
