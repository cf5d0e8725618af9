#pragma once

// Pathwise invariants evaluated on engine traces. Each checker returns the
// number of violations so a battery can require zero overall.

#include "divbang/engine.hpp"
#include "divbang/model.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace divbang::testing {

inline double slack(double scale) { return 1e-9 * (1.0 + std::abs(scale)); }

/// (b1/b2) O2 >= O1 for the offsets of the uncontrolled branches from
/// their running suprema.
inline int offset_violations(const ModelParams& p, std::span<const TraceEvent> trace) {
    int bad = 0;
    for (const TraceEvent& e : trace) {
        const double o1 = e.sup1 - e.u1;
        const double o2 = e.sup2 - e.u2;
        if ((p.b1 / p.b2) * o2 < o1 - slack(e.sup1 + e.sup2)) ++bad;
    }
    return bad;
}

/// Realized cumulative dividends never exceed L* = max(sup, 0) per branch.
inline int lstar_violations(std::span<const TraceEvent> trace) {
    int bad = 0;
    for (const TraceEvent& e : trace) {
        if (e.l1 > std::max(e.sup1, 0.0) + slack(e.sup1)) ++bad;
        if (e.l2 > std::max(e.sup2, 0.0) + slack(e.sup2)) ++bad;
    }
    return bad;
}

/// A ruin event directly follows a claim at the same instant.
inline int ruin_timing_violations(std::span<const TraceEvent> trace) {
    int bad = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i].kind != EventKind::Ruin) continue;
        if (i == 0 || trace[i - 1].kind != EventKind::Claim || trace[i - 1].t != trace[i].t) ++bad;
        if (!(trace[i].x1 < 0.0 && trace[i].x2 < 0.0)) ++bad;
    }
    return bad;
}

/// Cumulative dividends are nondecreasing, nothing is paid out of a negative
/// branch and no lump leaves its branch negative.
inline int ledger_violations(std::span<const TraceEvent> trace) {
    int bad = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const TraceEvent& a = trace[i - 1];
        const TraceEvent& e = trace[i];
        const double l_prev[2] = {a.l1, a.l2};
        const double l_now[2] = {e.l1, e.l2};
        const double x_prev[2] = {a.x1, a.x2};
        const double x_now[2] = {e.x1, e.x2};
        for (int k = 0; k < 2; ++k) {
            const double tol = slack(l_now[k]);
            if (l_now[k] < l_prev[k] - tol) ++bad;
            if (l_now[k] > l_prev[k] + tol) {
                if (x_prev[k] < -tol) ++bad;
                if (e.kind == EventKind::Lump && x_now[k] < -tol) ++bad;
            }
        }
    }
    return bad;
}

/// Transform pays at least as much as the wrapped strategy at every event
/// and is ruined exactly when it is.
inline int transform_violations(const PathOutcome& o) {
    int bad = 0;
    if (o.ruin_time != o.inner_ruin_time) ++bad;
    for (const TraceEvent& e : o.trace) {
        const double mine = e.l1 + e.l2;
        const double theirs = e.inner_l1 + e.inner_l2;
        if (mine < theirs - slack(theirs)) ++bad;
    }
    return bad;
}

} // namespace divbang::testing
