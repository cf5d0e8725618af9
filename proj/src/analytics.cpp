#include "divbang/analytics.hpp"

#include <cmath>
#include <limits>

namespace divbang {

namespace {

void check_branch(int branch) {
    if (branch != 1 && branch != 2) throw std::invalid_argument("branch must be 1 or 2");
}

int other(int branch) { return 3 - branch; }

/// log(a + b e^s) for a, b > 0 without overflow.
double log_sum_exp_term(double a, double b, double s) {
    if (s > 0.0) return s + std::log(b + a * std::exp(-s));
    return std::log(a + b * std::exp(s));
}

} // namespace

BoundsResult value_bounds(const ModelParams& p, SurplusPoint x) {
    if (!is_solvent(x)) throw std::invalid_argument("value_bounds: insolvent point");
    const double k = p.q + p.lambda;
    if (x.x1 >= 0.0 && x.x2 >= 0.0) {
        const double s = x.x1 + x.x2;
        return {s + (p.c1 + p.c2) / k, s + (p.c1 + p.c2) / p.q};
    }
    // one branch negative: `pos` pays from now, `neg` only after recovering
    const bool first_negative = x.x1 < 0.0;
    const double pos = first_negative ? x.x2 : x.x1;
    const double neg = first_negative ? x.x1 : x.x2;
    const double c_pos = first_negative ? p.c2 : p.c1;
    const double c_neg = first_negative ? p.c1 : p.c2;
    return {pos + c_pos / k + c_neg / k * std::exp(k * neg / c_neg),
            pos + c_pos / p.q + c_neg / p.q * std::exp(p.q * neg / c_neg)};
}

double explicit_bang_value_negative(const ModelParams& p, double x1, double x2, double v00) {
    if (!(x1 < 0.0)) throw std::invalid_argument("explicit_bang_value_negative: x1 must be negative");
    if (x2 < 0.0) throw std::invalid_argument("explicit_bang_value_negative: x2 must be nonnegative");
    if (v00 < 0.0) throw std::invalid_argument("explicit_bang_value_negative: v00 must be nonnegative");
    const double k = p.q + p.lambda;
    const double floor = p.c2 / k;
    return x2 + floor + (v00 - floor) * std::exp(k * x1 / p.c1);
}

RootPair characteristic_roots(const ModelParams& p, int branch) {
    check_branch(branch);
    const double c = p.premium(branch);
    const double g = p.gamma / p.proportion(branch);
    const double a = c;
    const double b = g * c - (p.q + p.lambda);
    const double cc = -g * p.q;
    // a > 0 and cc < 0, so the discriminant is positive
    const double disc = std::sqrt(b * b - 4.0 * a * cc);
    const double t = -0.5 * (b + std::copysign(disc, b));
    double r_a = t / a;
    double r_b = cc / t;
    if (r_a < r_b) std::swap(r_a, r_b);
    return {r_a, r_b};
}

double characteristic_poly(const ModelParams& p, int branch, double r) {
    check_branch(branch);
    const double c = p.premium(branch);
    const double g = p.gamma / p.proportion(branch);
    return c * r * r + (g * c - (p.q + p.lambda)) * r - g * p.q;
}

double barrier_rhs(const ModelParams& p, int branch, double lambda_div, double x) {
    check_branch(branch);
    const double g = p.gamma / p.proportion(branch);
    const auto [r1, r2] = characteristic_roots(p, branch);
    // numerator: r2^2 (g + r2) (g q + e^{r1 x} (g + r1) L r1), every factor positive
    // denominator: r1^2 (g + r1) (g q + e^{r2 x} (g + r2) L r2), last factor may be <= 0
    const double den_tail = g * p.q + std::exp(r2 * x) * (g + r2) * lambda_div * r2;
    if (!(den_tail > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    double log_num = 2.0 * std::log(-r2) + std::log(g + r2);
    log_num += lambda_div > 0.0 ? log_sum_exp_term(g * p.q, (g + r1) * lambda_div * r1, r1 * x)
                                : std::log(g * p.q);
    const double log_den = 2.0 * std::log(r1) + std::log(g + r1) + std::log(den_tail);
    return (log_num - log_den) / (r1 - r2);
}

BarrierSolve solve_barrier(const ModelParams& p, int branch, double lambda_div) {
    check_branch(branch);
    if (!(lambda_div >= 0.0)) throw std::invalid_argument("solve_barrier: reward rate must be nonnegative");
    BarrierSolve out;
    out.lambda_div = lambda_div;
    out.roots = characteristic_roots(p, branch);
    const auto g = [&](double x) { return x - barrier_rhs(p, branch, lambda_div, x); };

    if (lambda_div == 0.0) {
        out.x_star = barrier_rhs(p, branch, 0.0, 0.0);
        if (out.x_star < 0.0) {
            throw BarrierSolveError("solve_barrier: fixed point is negative, no sign change in bracket");
        }
        out.residual = std::abs(g(out.x_star));
        return out;
    }

    const double upper = 200.0 / p.gamma;
    const double gq = p.gamma / p.proportion(branch) * p.q;
    const double gp = p.gamma / p.proportion(branch);
    const auto [r1, r2] = out.roots;
    // den_tail > 0  <=>  e^{r2 x} < g q / (-(g + r2) L r2)  <=>  x > domain_start
    const double domain_start = std::log(gq / (-(gp + r2) * lambda_div * r2)) / r2;
    double lo = 0.0;
    if (domain_start >= 0.0) {
        lo = std::nextafter(domain_start, upper);
        // step off the singularity until g is finite
        double step = 1e-12 * std::max(1.0, domain_start);
        while (!std::isfinite(g(lo)) && lo < upper) {
            lo = domain_start + step;
            step *= 2.0;
        }
    }
    double hi = upper;
    double g_lo = g(lo);
    const double g_hi = g(hi);
    if (!(std::isfinite(g_lo) && std::isfinite(g_hi)) || !(g_lo < 0.0 && g_hi > 0.0)) {
        throw BarrierSolveError("solve_barrier: no sign change of x - RHS(x) in [0, 200/gamma]");
    }
    int it = 0;
    double mid = 0.5 * (lo + hi);
    for (; it < 400; ++it) {
        mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0 || hi - lo < 1e-13 * std::max(1.0, mid)) break;
        if (gm < 0.0) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    out.x_star = mid;
    out.iterations = it;
    out.residual = std::abs(g(mid));
    return out;
}

BarrierInterval barrier_interval(const ModelParams& p, int branch) {
    check_branch(branch);
    return {solve_barrier(p, branch, 0.0), solve_barrier(p, branch, p.premium(other(branch)))};
}

} // namespace divbang
