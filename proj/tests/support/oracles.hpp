#pragma once

// Independent reference computations for the tests. Nothing here calls the
// event engine; the time-stepping oracles only share the claim list.

#include "divbang/engine.hpp"
#include "divbang/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace divbang::testing {

/// Cumulative dividends of L* on one branch by integrating
/// c * 1{sup >= 0} * 1{at running max} dt on a uniform grid up to T.
inline double lstar_time_stepping(double x0, double c, double b, const std::vector<Claim>& claims, double T,
                                  double dt) {
    double x = x0;
    double sup = x0;
    double paid = std::max(x0, 0.0);
    std::size_t k = 0;
    const auto steps = static_cast<long>(std::llround(T / dt));
    for (long n = 0; n < steps; ++n) {
        const double t1 = static_cast<double>(n + 1) * dt;
        bool jumped = false;
        while (k < claims.size() && claims[k].time <= t1) {
            x -= b * claims[k].size;
            ++k;
            jumped = true;
        }
        const bool at_max = !jumped && x >= sup;
        x += c * dt;
        if (at_max && sup >= 0.0) paid += c * dt;
        sup = std::max(sup, x);
    }
    return paid;
}

/// Discounted value of independent barrier strategies on both branches by
/// time stepping. Claims are applied at their exact times; premium is added
/// in steps of dt and the excess over each barrier is paid at the end of
/// the step. After the last claim the path runs to `horizon`.
inline double barrier_value_time_stepping(const ModelParams& p, SurplusPoint x0, std::array<double, 2> level,
                                          const std::vector<Claim>& claims, double horizon, double dt) {
    std::array<double, 2> x{x0.x1, x0.x2};
    const std::array<double, 2> c{p.c1, p.c2};
    const std::array<double, 2> b{p.b1, p.b2};
    double value = 0.0;
    const auto pay = [&](double t) {
        for (int i = 0; i < 2; ++i) {
            if (x[i] > level[i]) {
                value += std::exp(-p.q * t) * (x[i] - level[i]);
                x[i] = level[i];
            }
        }
    };
    pay(0.0);
    double t = 0.0;
    std::size_t k = 0;
    while (t < horizon) {
        const double next_claim = k < claims.size() ? claims[k].time : std::numeric_limits<double>::infinity();
        const double t1 = std::min(t + dt, horizon);
        if (next_claim <= t1) {
            for (int i = 0; i < 2; ++i) x[i] += c[i] * (next_claim - t);
            t = next_claim;
            for (int i = 0; i < 2; ++i) x[i] -= b[i] * claims[k].size;
            ++k;
            if (x[0] < 0.0 && x[1] < 0.0) return value;
            pay(t);
            continue;
        }
        for (int i = 0; i < 2; ++i) x[i] += c[i] * (t1 - t);
        t = t1;
        pay(t);
    }
    return value;
}

/// Claim list drawn with std::mt19937_64, independent of the engine's RNG.
inline std::vector<Claim> random_claims(std::mt19937_64& gen, const ModelParams& p, double horizon) {
    std::exponential_distribution<double> inter(p.lambda);
    std::exponential_distribution<double> size(p.gamma);
    std::vector<Claim> out;
    double t = 0.0;
    while (true) {
        t += inter(gen);
        if (t > horizon) break;
        out.push_back({t, size(gen)});
    }
    return out;
}

/// Valid parameter set with b1 <= b2 drawn at random.
inline ModelParams random_params(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p;
    p.b1 = 0.1 + 0.4 * u(gen);
    p.b2 = 1.0 - p.b1;
    p.c1 = 1.0 + 4.0 * u(gen);
    p.c2 = p.c1 * (p.b2 / p.b1) * (0.2 + 0.8 * u(gen));
    p.lambda = 0.5 + 1.5 * u(gen);
    p.gamma = 0.1 + 0.9 * u(gen);
    p.q = 0.02 + 0.08 * u(gen);
    return validate_params(p);
}

inline double greedy_value_negative_second(const ModelParams& p, double x1, double x2) {
    const double k = p.q + p.lambda;
    return x1 + p.c1 / k + (p.c2 / k) * std::exp(k * x2 / p.c2);
}

} // namespace divbang::testing
