#pragma once

// Test-only oracles, independent of the library's solver paths: the FTRL
// objective evaluated directly over a simplex mesh, and the raw potential with
// finite-difference gradients.

#include <cmath>
#include <vector>

#include "htbandit/rng.hpp"

namespace htbtest {

inline double psi_raw(const std::vector<double>& v, double alpha) {
    double s = 0.0;
    for (double x : v) s += std::pow(x, 1.0 / alpha);
    return -alpha * s;
}

inline double ftrl_objective(const std::vector<double>& loss, double eta, double alpha,
                             const std::vector<double>& x) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += loss[i] * x[i];
    return eta * dot + psi_raw(x, alpha);
}

struct GridResult {
    std::vector<double> x;
    double value = 0.0;
};

// Exhaustive search over the K-1 simplex at the given mesh, K in {2, 3}.
inline GridResult grid_search_simplex(const std::vector<double>& loss, double eta, double alpha,
                                      double mesh) {
    const long n = std::lround(1.0 / mesh);
    GridResult best;
    best.value = 1e300;
    if (loss.size() == 2) {
        for (long a = 0; a <= n; ++a) {
            const std::vector<double> x{static_cast<double>(a) / n,
                                        static_cast<double>(n - a) / n};
            const double v = ftrl_objective(loss, eta, alpha, x);
            if (v < best.value) best = {x, v};
        }
    } else if (loss.size() == 3) {
        for (long a = 0; a <= n; ++a)
            for (long b = 0; b <= n - a; ++b) {
                const std::vector<double> x{static_cast<double>(a) / n,
                                            static_cast<double>(b) / n,
                                            static_cast<double>(n - a - b) / n};
                const double v = ftrl_objective(loss, eta, alpha, x);
                if (v < best.value) best = {x, v};
            }
    }
    return best;
}

// Central-difference gradient of the raw potential, component i.
inline double fd_grad_psi(const std::vector<double>& v, double alpha, std::size_t i,
                          double h = 1e-7) {
    std::vector<double> hi = v, lo = v;
    hi[i] += h;
    lo[i] -= h;
    return (psi_raw(hi, alpha) - psi_raw(lo, alpha)) / (2.0 * h);
}

inline double uniform_in(htbandit::Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

inline std::vector<double> random_interior_point(htbandit::Rng& rng, int num_arms,
                                                 double floor = 0.02) {
    std::vector<double> x(static_cast<std::size_t>(num_arms));
    double sum = 0.0;
    for (auto& v : x) {
        v = floor + rng.uniform();
        sum += v;
    }
    for (auto& v : x) v /= sum;
    return x;
}

}  // namespace htbtest
