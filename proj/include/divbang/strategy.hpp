#pragma once

#include "divbang/model.hpp"

#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

namespace divbang {

inline constexpr double kNoBarrier = std::numeric_limits<double>::infinity();

/// Branch 1 follows a barrier at `barrier`, branch 2 pays the maximal L2*.
struct Bang1 {
    double barrier = 0.0;
};
/// Branch 2 follows a barrier at `barrier`, branch 1 pays the maximal L1*.
struct Bang2 {
    double barrier = 0.0;
};
/// (L1*, L2*): both branches pay everything they can.
struct Greedy {};
struct NoDividends {};
/// Independent barriers on both branches. Level 0 is the maximal payout L*,
/// kNoBarrier never pays.
struct Barriers {
    double level1 = kNoBarrier;
    double level2 = kNoBarrier;
};
struct DominanceTransform;

using StrategyVariant = std::variant<Bang1, Bang2, Greedy, NoDividends, Barriers, DominanceTransform>;

/**
 * Declarative dividend policy.
 *
 * Every non-transform variant reduces to a pair of barrier levels (see
 * branch_levels()). DominanceTransform wraps such a pair and realizes the
 * construction that keeps the controlled process in D1 while paying at
 * least as much as the inner strategy.
 */
class StrategySpec {
public:
    StrategySpec();
    StrategySpec(Bang1 s);
    StrategySpec(Bang2 s);
    StrategySpec(Greedy s);
    StrategySpec(NoDividends s);
    StrategySpec(Barriers s);
    StrategySpec(DominanceTransform s);

    const StrategyVariant& variant() const;
    bool is_transform() const;
    /// The wrapped strategy for a transform, *this otherwise.
    const StrategySpec& inner() const;

    /// Barrier levels (branch 1, branch 2) of a non-transform strategy.
    Barriers branch_levels() const;

    /// CLI grammar: bang1:<b>, bang2:<b>, greedy, none, barriers:<l1>,<l2>,
    /// transform(<inner>).
    static StrategySpec parse(std::string_view text);
    std::string to_string() const;

private:
    std::shared_ptr<const StrategyVariant> v_;
};

struct DominanceTransform {
    StrategySpec inner;
};

/// Cumulative dividends of the maximal univariate strategy L* given the
/// running supremum of the uncontrolled branch: max(running_sup, 0).
double bang_payout_closed_form(double x0, double running_sup);

struct BarrierAction {
    enum class Kind { Nothing, Rate, Lump };
    Kind kind = Kind::Nothing;
    /// Lump amount for Kind::Lump, premium rate for Kind::Rate.
    double amount = 0.0;
};

/// What a barrier strategy does at a given controlled surplus.
BarrierAction barrier_action(double level, double controlled_surplus, double premium_rate);

enum class Region { D1, D2, Boundary };

/// D1: (b2/b1) x1 > x2, D2: (b2/b1) x1 < x2; throws for insolvent points.
Region region_classify(const ModelParams& p, SurplusPoint x);

struct LedgerPair {
    double l1 = 0.0;
    double l2 = 0.0;
};

/// Transformed cumulative dividends at time t given the inner strategy's
/// cumulative dividends `inner` at t and the maximal branch-2 payout
/// `l2_star` at t. Requires b1 <= b2 and x0 in D1.
LedgerPair dominance_transform_payout(const ModelParams& p, SurplusPoint x0, LedgerPair inner,
                                      double l2_star, double t);

} // namespace divbang
