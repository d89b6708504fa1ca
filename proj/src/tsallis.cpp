#include "htbandit/tsallis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace htbandit {

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 1.0) || !(alpha <= 2.0)) throw InvalidInput("alpha must lie in (1, 2]");
}

// Normalization map g(lambda) = sum_i (w_i + lambda)^(-beta) for shifted,
// scaled losses w_i = eta*(L_i - min L) >= 0. Strictly decreasing and convex
// on lambda > 0, with g(1) >= 1 >= g(K^(1/beta)).
double normalization_sum(const std::vector<double>& w, double lambda, double beta) {
    long double s = 0.0L;
    for (double wi : w) s += static_cast<long double>(std::pow(wi + lambda, -beta));
    return static_cast<double>(s);
}

double normalization_slope(const std::vector<double>& w, double lambda, double beta) {
    long double s = 0.0L;
    for (double wi : w) s += static_cast<long double>(std::pow(wi + lambda, -beta - 1.0));
    return static_cast<double>(-beta * s);
}

}  // namespace

FtrlProblem::FtrlProblem(std::vector<double> cumulative_loss_, double eta_, double alpha_)
    : cumulative_loss(std::move(cumulative_loss_)), eta(eta_), alpha(alpha_) {
    require_alpha(alpha);
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("eta must be finite and > 0");
    if (cumulative_loss.size() < 2) throw InvalidInput("FTRL problem needs K >= 2 arms");
    for (double v : cumulative_loss)
        if (!std::isfinite(v)) throw InvalidInput("cumulative loss entries must be finite");
}

double tsallis_potential(const SimplexPoint& x, double alpha) {
    require_alpha(alpha);
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += std::pow(x[i], 1.0 / alpha);
    return -alpha * s;
}

SimplexPoint ftrl_argmin(const FtrlProblem& problem) {
    const double beta = problem.alpha / (problem.alpha - 1.0);
    const std::size_t num_arms = problem.cumulative_loss.size();

    // Translation invariance: shift so min(w) = 0; the multiplier then lives in
    // [1, K^(1/beta)] (the min component forces g(1) >= 1, Hoelder the other end).
    double lmin = problem.cumulative_loss[0];
    for (double v : problem.cumulative_loss) lmin = std::min(lmin, v);
    std::vector<double> w(num_arms);
    for (std::size_t i = 0; i < num_arms; ++i)
        w[i] = problem.eta * (problem.cumulative_loss[i] - lmin);

    double lo = 1.0;
    double hi = std::pow(static_cast<double>(num_arms), 1.0 / beta);
    double lambda = hi;
    double g = normalization_sum(w, lambda, beta);

    bool converged = std::abs(g - 1.0) <= 1e-12;
    for (int iter = 0; !converged && iter < 200; ++iter) {
        if (g > 1.0)
            lo = std::max(lo, lambda);
        else
            hi = std::min(hi, lambda);

        const double slope = normalization_slope(w, lambda, beta);
        double next = lambda - (g - 1.0) / slope;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
        lambda = next;
        g = normalization_sum(w, lambda, beta);
        converged = std::abs(g - 1.0) <= 1e-12;
    }
    if (!converged)
        throw NumericFailure("ftrl_argmin: normalization did not converge within 200 iterations");

    std::vector<double> x(num_arms);
    for (std::size_t i = 0; i < num_arms; ++i) x[i] = std::pow(w[i] + lambda, -beta);
    return SimplexPoint::interior(std::move(x));
}

std::vector<double> conjugate_step(const SimplexPoint& x, double eta, double alpha,
                                   const std::vector<double>& v) {
    require_alpha(alpha);
    if (static_cast<int>(v.size()) != x.size())
        throw InvalidInput("conjugate_step: dimension mismatch");
    if (x.is_one_hot()) throw InvalidInput("conjugate_step: x must be strictly positive");

    const double q = (alpha - 1.0) / alpha;
    const double beta = alpha / (alpha - 1.0);
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double base = std::pow(x[static_cast<int>(i)], -q) + eta * v[i];
        if (!(base > 0.0))
            throw NumericFailure("conjugate_step: non-positive base at component " +
                                 std::to_string(i + 1) + " (loss vector too large)");
        z[i] = std::pow(base, -beta);
    }
    return z;
}

double bregman_divergence(const SimplexPoint& x, const std::vector<double>& z, double alpha) {
    require_alpha(alpha);
    if (static_cast<int>(z.size()) != x.size())
        throw InvalidInput("bregman_divergence: dimension mismatch");
    if (x.is_one_hot()) throw InvalidInput("bregman_divergence: x must be strictly positive");

    const double q = (alpha - 1.0) / alpha;
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double xi = x[static_cast<int>(i)];
        const double zi = z[i];
        if (!(zi > 0.0) || !std::isfinite(zi))
            throw InvalidInput("bregman_divergence: z must be strictly positive and finite");
        // Per-component f(x) - f(z) - f'(z)(x - z) with f(u) = -alpha*u^(1/alpha).
        d += -alpha * std::pow(xi, 1.0 / alpha) + alpha * std::pow(zi, 1.0 / alpha) +
             std::pow(zi, -q) * (xi - zi);
    }
    return d;
}

double theta_alpha(double alpha) {
    require_alpha(alpha);
    const double first = 1.0 - std::exp2(-(alpha - 1.0) / (2.0 * alpha - 1.0));
    // The raw second branch is 1^inf at alpha = 2; its limit there is e^(-1/2).
    const double second = (std::abs(2.0 - alpha) < 1e-9)
                              ? std::exp(-0.5)
                              : std::exp(std::log(2.0 - 2.0 / alpha) / (2.0 - alpha));
    return std::min(first, second);
}

}  // namespace htbandit
