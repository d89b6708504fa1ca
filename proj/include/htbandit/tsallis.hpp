#pragma once

#include <vector>

#include "htbandit/core.hpp"

namespace htbandit {

// The 1/alpha-Tsallis entropy regularizer Psi(x) = -alpha * sum_i x_i^(1/alpha)
// and the FTRL step it induces over the probability simplex.
//
// The argmin has the closed KKT form x_i = (eta*L_i + lambda)^(-alpha/(alpha-1))
// for the unique multiplier lambda normalizing the sum to 1; lambda is found by
// safeguarded Newton on the strictly decreasing normalization map.

struct FtrlProblem {
    std::vector<double> cumulative_loss;  // sum of estimated loss vectors so far
    double eta;                           // learning rate, > 0
    double alpha;                         // exponent, (1, 2]

    FtrlProblem(std::vector<double> cumulative_loss_, double eta_, double alpha_);
};

// Psi(x). Accepts one-hot points (zero components contribute zero).
double tsallis_potential(const SimplexPoint& x, double alpha);

// Unique minimizer of eta * <L, x> + Psi(x) over the simplex. All components
// strictly positive. Throws NumericFailure if the normalization does not reach
// |sum x - 1| <= 1e-12 within 200 iterations.
SimplexPoint ftrl_argmin(const FtrlProblem& problem);

// z with z_i = (x_i^(-(alpha-1)/alpha) + eta*v_i)^(-alpha/(alpha-1)): the image
// of x one mirror step along v. z need not sum to 1. Throws NumericFailure if
// a component's base is not strictly positive (v too large for the step).
std::vector<double> conjugate_step(const SimplexPoint& x, double eta, double alpha,
                                   const std::vector<double>& v);

// Bregman divergence of the regularizer, measured at x from z:
// Psi(x) - Psi(z) - <grad Psi(z), x - z>. Both arguments strictly positive;
// z need not be normalized.
double bregman_divergence(const SimplexPoint& x, const std::vector<double>& z, double alpha);

// Skipping-threshold factor
//   Theta_alpha = min{ 1 - 2^(-(alpha-1)/(2alpha-1)), (2 - 2/alpha)^(1/(2-alpha)) },
// with the second branch evaluated as its limit e^(-1/2) when |2-alpha| < 1e-9.
double theta_alpha(double alpha);

}  // namespace htbandit
