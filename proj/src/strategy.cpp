#include "divbang/strategy.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace divbang {

namespace {

double parse_level(std::string_view text, std::string_view whole) {
    if (text == "inf") return kNoBarrier;
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw std::invalid_argument("bad barrier level in strategy '" + std::string(whole) + "'");
    }
    return v;
}

std::string format_level(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void check_level(double level) {
    if (std::isnan(level) || level < 0.0) throw std::invalid_argument("barrier level must be nonnegative");
}

} // namespace

StrategySpec::StrategySpec() : v_(std::make_shared<StrategyVariant>(NoDividends{})) {}

StrategySpec::StrategySpec(Bang1 s) {
    check_level(s.barrier);
    v_ = std::make_shared<StrategyVariant>(s);
}

StrategySpec::StrategySpec(Bang2 s) {
    check_level(s.barrier);
    v_ = std::make_shared<StrategyVariant>(s);
}

StrategySpec::StrategySpec(Greedy s) : v_(std::make_shared<StrategyVariant>(s)) {}

StrategySpec::StrategySpec(NoDividends s) : v_(std::make_shared<StrategyVariant>(s)) {}

StrategySpec::StrategySpec(Barriers s) {
    check_level(s.level1);
    check_level(s.level2);
    v_ = std::make_shared<StrategyVariant>(s);
}

StrategySpec::StrategySpec(DominanceTransform s) {
    if (s.inner.is_transform()) throw std::invalid_argument("transform cannot wrap another transform");
    v_ = std::make_shared<StrategyVariant>(std::move(s));
}

const StrategyVariant& StrategySpec::variant() const { return *v_; }

bool StrategySpec::is_transform() const { return std::holds_alternative<DominanceTransform>(*v_); }

const StrategySpec& StrategySpec::inner() const {
    if (const auto* t = std::get_if<DominanceTransform>(v_.get())) return t->inner;
    return *this;
}

Barriers StrategySpec::branch_levels() const {
    struct Visitor {
        Barriers operator()(const Bang1& s) const { return {s.barrier, 0.0}; }
        Barriers operator()(const Bang2& s) const { return {0.0, s.barrier}; }
        Barriers operator()(const Greedy&) const { return {0.0, 0.0}; }
        Barriers operator()(const NoDividends&) const { return {kNoBarrier, kNoBarrier}; }
        Barriers operator()(const Barriers& s) const { return s; }
        Barriers operator()(const DominanceTransform& s) const { return s.inner.branch_levels(); }
    };
    return std::visit(Visitor{}, *v_);
}

StrategySpec StrategySpec::parse(std::string_view text) {
    const std::string_view whole = text;
    if (text == "greedy") return Greedy{};
    if (text == "none") return NoDividends{};
    if (text.starts_with("bang1:")) return Bang1{parse_level(text.substr(6), whole)};
    if (text.starts_with("bang2:")) return Bang2{parse_level(text.substr(6), whole)};
    if (text.starts_with("barriers:")) {
        const auto rest = text.substr(9);
        const auto comma = rest.find(',');
        if (comma == std::string_view::npos) {
            throw std::invalid_argument("barriers strategy needs two levels: '" + std::string(whole) + "'");
        }
        return Barriers{parse_level(rest.substr(0, comma), whole), parse_level(rest.substr(comma + 1), whole)};
    }
    if (text.starts_with("transform(") && text.ends_with(")")) {
        return DominanceTransform{parse(text.substr(10, text.size() - 11))};
    }
    throw std::invalid_argument("unknown strategy '" + std::string(whole) + "'");
}

std::string StrategySpec::to_string() const {
    struct Visitor {
        std::string operator()(const Bang1& s) const { return "bang1:" + format_level(s.barrier); }
        std::string operator()(const Bang2& s) const { return "bang2:" + format_level(s.barrier); }
        std::string operator()(const Greedy&) const { return "greedy"; }
        std::string operator()(const NoDividends&) const { return "none"; }
        std::string operator()(const Barriers& s) const {
            return "barriers:" + format_level(s.level1) + "," + format_level(s.level2);
        }
        std::string operator()(const DominanceTransform& s) const {
            return "transform(" + s.inner.to_string() + ")";
        }
    };
    return std::visit(Visitor{}, *v_);
}

double bang_payout_closed_form(double x0, double running_sup) {
    if (running_sup < x0) throw std::invalid_argument("running supremum cannot be below the initial surplus");
    return std::max(running_sup, 0.0);
}

BarrierAction barrier_action(double level, double controlled_surplus, double premium_rate) {
    check_level(level);
    if (controlled_surplus > level) return {BarrierAction::Kind::Lump, controlled_surplus - level};
    if (controlled_surplus == level) return {BarrierAction::Kind::Rate, premium_rate};
    return {BarrierAction::Kind::Nothing, 0.0};
}

Region region_classify(const ModelParams& p, SurplusPoint x) {
    if (!is_solvent(x)) throw std::invalid_argument("region_classify: insolvent point");
    // (b2/b1) x1 vs x2, multiplied through by b1 > 0
    const double lhs = p.b2 * x.x1;
    const double rhs = p.b1 * x.x2;
    if (lhs > rhs) return Region::D1;
    if (lhs < rhs) return Region::D2;
    return Region::Boundary;
}

LedgerPair dominance_transform_payout(const ModelParams& p, SurplusPoint x0, LedgerPair inner,
                                      double l2_star, double t) {
    if (p.b1 > p.b2) throw std::invalid_argument("dominance transform requires b1 <= b2");
    if (x0.x1 < 0.0 || x0.x2 < 0.0) throw std::invalid_argument("dominance transform requires x0 >= 0");
    if (region_classify(p, x0) == Region::D2) throw std::invalid_argument("dominance transform requires x0 in D1");
    if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
    const double r = p.b1 / p.b2;
    const double cap = x0.x1 - r * x0.x2 + (p.c1 - r * p.c2) * t + r * inner.l2;
    return {std::min(inner.l1, cap), l2_star};
}

} // namespace divbang
