#pragma once

#include "divbang/model.hpp"
#include "divbang/random.hpp"
#include "divbang/strategy.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace divbang {

inline constexpr double kInfTime = std::numeric_limits<double>::infinity();

struct SimConfig {
    /// A path is censored at the first claim instant t where
    /// e^{-q t} * (upper value bound at the current state) < horizon_epsilon.
    double horizon_epsilon = 1e-6;
    std::uint64_t max_events = 10'000'000;
    bool trace_enabled = false;

    void validate() const;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EventKind { Start, Claim, Lump, RateOn, RateOff, Recover, Ruin, Censor };

const char* to_string(EventKind kind);

/// Snapshot taken right after an event was applied. `x*`/`l*` describe the
/// realized strategy; `inner_*` the wrapped strategy of a dominance transform
/// (identical to the realized values otherwise).
struct TraceEvent {
    double t = 0.0;
    EventKind kind = EventKind::Start;
    int branch = 0; ///< 1 or 2, 0 when the event concerns both
    bool inner_event = false; ///< mode change of the wrapped strategy only
    double x1 = 0.0, x2 = 0.0;
    double l1 = 0.0, l2 = 0.0;
    double u1 = 0.0, u2 = 0.0;     ///< uncontrolled surplus
    double sup1 = 0.0, sup2 = 0.0; ///< running suprema of the uncontrolled surplus
    double inner_x1 = 0.0, inner_x2 = 0.0;
    double inner_l1 = 0.0, inner_l2 = 0.0;
};

struct PathOutcome {
    double ruin_time = kInfTime; ///< +inf when censored or when claims stop
    bool censored = false;
    double end_time = kInfTime;
    std::array<double, 2> discounted{};
    std::array<double, 2> total{};
    std::array<double, 2> inner_discounted{};
    std::array<double, 2> inner_total{};
    double inner_ruin_time = kInfTime;
    std::uint64_t n_claims = 0;
    std::vector<TraceEvent> trace;

    double value() const { return discounted[0] + discounted[1]; }
};

/// Simulates one controlled path with claims drawn from `rng`
/// (inter-arrival time, then size, per claim).
PathOutcome simulate_path(const ModelParams& p, SurplusPoint x0, const StrategySpec& s,
                          const SimConfig& cfg, RandomSource& rng);

/// Same engine driven by a fixed claim list (absolute, strictly increasing
/// times). After the last claim no further claims arrive and payments are
/// integrated to infinity.
PathOutcome simulate_path_scripted(const ModelParams& p, SurplusPoint x0, const StrategySpec& s,
                                   const SimConfig& cfg, std::span<const Claim> claims);

/// rate * (e^{-q a} - e^{-q b}) / q; b may be +inf.
double discount_rate_segment(double rate, double a, double b, double q);

enum class RuinState { Solvent, Ruined };

RuinState ruin_check(SurplusPoint controlled);

/// Time -x/c for a negative branch to drift back to zero.
double branch_recovery_time(double x, double c);

/// CSV with header `t,event,branch,x1,x2,l1,l2`; inner events are skipped.
void write_trace_csv(std::ostream& os, std::span<const TraceEvent> trace);

} // namespace divbang
