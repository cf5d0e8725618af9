#pragma once

#include "divbang/model.hpp"

#include <stdexcept>
#include <string>

namespace divbang {

struct BoundsResult {
    double lower = 0.0;
    double upper = 0.0;
};

/// Lower/upper bounds on the optimal value function at a solvent point.
/// The lower bound is the value of paying everything immediately; the upper
/// bound pays all premium from time zero (or from the recovery time of a
/// negative branch) without ever being ruined.
BoundsResult value_bounds(const ModelParams& p, SurplusPoint x);

/// Value of the Bang1 strategy at x1 < 0 <= x2 expressed through its value
/// v00 at the origin. Requires x1 < 0, x2 >= 0 and v00 >= 0.
double explicit_bang_value_negative(const ModelParams& p, double x1, double x2, double v00);

struct RootPair {
    double r1 = 0.0; ///< positive root
    double r2 = 0.0; ///< negative root
};

/// Roots of c R^2 + (g c - (q + lambda)) R - g q with g = gamma / b for the
/// chosen branch's (c, b).
RootPair characteristic_roots(const ModelParams& p, int branch);

/// Characteristic polynomial value, for residual checks.
double characteristic_poly(const ModelParams& p, int branch, double r);

class BarrierSolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BarrierSolve {
    double x_star = 0.0;
    double lambda_div = 0.0;
    RootPair roots;
    int iterations = 0;
    double residual = 0.0;
};

/**
 * Optimal barrier of the univariate problem with a constant extra reward
 * rate `lambda_div` paid until ruin, for exponential claims.
 *
 * Solves x = RHS(x) by bisection on g(x) = x - RHS(x). For lambda_div = 0 the
 * right-hand side is constant and is returned directly. For lambda_div > 0
 * the logarithm's argument is only positive above a threshold where g tends
 * to -infinity; the bracket starts there. Throws BarrierSolveError when no
 * sign change exists in [0, 200 / gamma].
 */
BarrierSolve solve_barrier(const ModelParams& p, int branch, double lambda_div);

/// Right-hand side of the barrier fixed point; NaN outside its domain.
double barrier_rhs(const ModelParams& p, int branch, double lambda_div, double x);

struct BarrierInterval {
    BarrierSolve low;  ///< lambda_div = 0
    BarrierSolve high; ///< lambda_div = premium of the other branch
};

/// Search range for the barrier of a bang strategy: the solutions for the
/// smallest and largest possible reward rate of the maximally paying branch.
BarrierInterval barrier_interval(const ModelParams& p, int branch);

} // namespace divbang
