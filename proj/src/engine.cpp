#include "divbang/engine.hpp"

#include "divbang/analytics.hpp"
#include "divbang/csv.hpp"

#include <algorithm>
#include <cmath>

namespace divbang {

void SimConfig::validate() const {
    if (!(horizon_epsilon > 0.0 && horizon_epsilon < 1.0)) {
        throw std::invalid_argument("horizon_epsilon must lie in (0, 1)");
    }
    if (max_events < 1) throw std::invalid_argument("max_events must be at least 1");
}

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::Start: return "start";
    case EventKind::Claim: return "claim";
    case EventKind::Lump: return "lump";
    case EventKind::RateOn: return "rate_on";
    case EventKind::RateOff: return "rate_off";
    case EventKind::Recover: return "recover";
    case EventKind::Ruin: return "ruin";
    case EventKind::Censor: return "censor";
    }
    return "?";
}

double discount_rate_segment(double rate, double a, double b, double q) {
    if (!(q > 0.0)) throw std::invalid_argument("discount rate must be positive");
    if (a < 0.0 || b < a) throw std::invalid_argument("discount_rate_segment: need 0 <= a <= b");
    if (std::isinf(b)) return rate * std::exp(-q * a) / q;
    return rate * std::exp(-q * a) * -std::expm1(-q * (b - a)) / q;
}

RuinState ruin_check(SurplusPoint controlled) {
    return is_solvent(controlled) ? RuinState::Solvent : RuinState::Ruined;
}

double branch_recovery_time(double x, double c) {
    if (!(x < 0.0)) throw std::invalid_argument("branch_recovery_time: surplus must be negative");
    if (!(c > 0.0)) throw std::invalid_argument("branch_recovery_time: premium rate must be positive");
    return -x / c;
}

void write_trace_csv(std::ostream& os, std::span<const TraceEvent> trace) {
    os << "t,event,branch,x1,x2,l1,l2\n";
    for (const auto& e : trace) {
        if (e.inner_event) continue;
        os << csv_double(e.t) << ',' << to_string(e.kind) << ',' << e.branch << ',' << csv_double(e.x1) << ','
           << csv_double(e.x2) << ',' << csv_double(e.l1) << ',' << csv_double(e.l2) << '\n';
    }
}

namespace {

struct ClaimDraw {
    double interarrival;
    double size;
};

class RandomClaims {
public:
    RandomClaims(const ModelParams& p, RandomSource& rng) : rng_(rng), lambda_(p.lambda), gamma_(p.gamma) {}

    ClaimDraw next() {
        const double dt = rng_.exponential(lambda_);
        const double size = rng_.exponential(gamma_);
        return {dt, size};
    }

private:
    RandomSource& rng_;
    double lambda_;
    double gamma_;
};

class ScriptedClaims {
public:
    explicit ScriptedClaims(std::span<const Claim> claims) : claims_(claims) {
        for (std::size_t i = 0; i < claims.size(); ++i) {
            if (claims[i].time < 0.0 || claims[i].size < 0.0 ||
                (i > 0 && !(claims[i].time > claims[i - 1].time))) {
                throw std::invalid_argument("scripted claims must have increasing nonnegative times and sizes");
            }
        }
    }

    ClaimDraw next() {
        if (idx_ >= claims_.size()) return {kInfTime, 0.0};
        const double prev = idx_ == 0 ? 0.0 : claims_[idx_ - 1].time;
        const auto& c = claims_[idx_++];
        return {c.time - prev, c.size};
    }

private:
    std::span<const Claim> claims_;
    std::size_t idx_ = 0;
};

/// One branch following a barrier at `level` (0: maximal payout, inf: none).
struct Branch {
    double x = 0.0;
    double level = kNoBarrier;
    double c = 0.0;
    double b = 0.0;
    bool at_level = false;
    double paid = 0.0;
    double paid_disc = 0.0;

    double slope() const { return at_level ? 0.0 : c; }
};

enum class Mover { Claim, Inner1, Inner2, Outer2, Crossing };

class PathSimulator {
public:
    PathSimulator(const ModelParams& p, SurplusPoint x0, const StrategySpec& s, const SimConfig& cfg)
        : p_(p), cfg_(cfg), transform_(s.is_transform()), ratio_(p.b1 / p.b2) {
        cfg.validate();
        if (!is_solvent(x0)) throw SimulationError("initial state is insolvent");
        if (!std::isfinite(x0.x1) || !std::isfinite(x0.x2)) throw SimulationError("initial state must be finite");
        if (transform_) {
            if (p.b1 > p.b2) throw SimulationError("dominance transform requires b1 <= b2");
            if (region_classify(p, x0) == Region::D2) throw SimulationError("dominance transform requires x0 in D1");
        }
        const Barriers levels = s.branch_levels();
        inner_[0] = Branch{.x = x0.x1, .level = levels.level1, .c = p.c1, .b = p.b1};
        inner_[1] = Branch{.x = x0.x2, .level = levels.level2, .c = p.c2, .b = p.b2};
        outer2_ = Branch{.x = x0.x2, .level = 0.0, .c = p.c2, .b = p.b2};
        y_ = x0.x1;
        u_ = {x0.x1, x0.x2};
        sup_ = u_;
    }

    template <class Source>
    PathOutcome run(Source& src) {
        emit(EventKind::Start, 0);
        apply_lumps();
        while (true) {
            const ClaimDraw draw = src.next();
            const double t_claim = t_ + draw.interarrival;
            run_until(t_claim);
            if (std::isinf(t_claim)) {
                finish_without_claims();
                break;
            }
            if (++out_.n_claims > cfg_.max_events) {
                throw SimulationError("simulation exceeded max_events claims");
            }
            apply_claim(draw.size);
            if (check_ruin()) break;
            apply_lumps();
            if (check_censor()) break;
        }
        out_.discounted = {realized1_paid_disc(), realized2().paid_disc};
        out_.total = {realized1_paid(), realized2().paid};
        out_.inner_discounted = {inner_[0].paid_disc, inner_[1].paid_disc};
        out_.inner_total = {inner_[0].paid, inner_[1].paid};
        return std::move(out_);
    }

private:
    const Branch& realized2() const { return transform_ ? outer2_ : inner_[1]; }
    double realized_x1() const { return transform_ ? y_ : inner_[0].x; }
    double realized1_paid() const { return transform_ ? y_paid_ : inner_[0].paid; }
    double realized1_paid_disc() const { return transform_ ? y_paid_disc_ : inner_[0].paid_disc; }

    double max_line() const { return std::max(inner_[0].x, ratio_ * inner_[1].x); }

    // Realized branch 1 follows the active line; it pays what the line does
    // not absorb of its premium.
    double y_rate() const {
        const double a = inner_[0].x;
        const double b = ratio_ * inner_[1].x;
        const double sa = inner_[0].slope();
        const double sb = ratio_ * inner_[1].slope();
        const double slope = (a > b || (a == b && sa >= sb)) ? sa : sb;
        return p_.c1 - slope;
    }

    void sync_y_rate() {
        if (!transform_) return;
        const bool on = y_rate() > 0.0;
        if (on == y_streaming_) return;
        y_streaming_ = on;
        emit(on ? EventKind::RateOn : EventKind::RateOff, 1);
    }

    void emit(EventKind kind, int branch, bool inner_event = false) {
        if (!cfg_.trace_enabled) return;
        TraceEvent e;
        e.t = t_;
        e.kind = kind;
        e.branch = branch;
        e.inner_event = inner_event;
        e.x1 = realized_x1();
        e.x2 = realized2().x;
        e.l1 = realized1_paid();
        e.l2 = realized2().paid;
        e.u1 = u_[0];
        e.u2 = u_[1];
        e.sup1 = sup_[0];
        e.sup2 = sup_[1];
        e.inner_x1 = inner_[0].x;
        e.inner_x2 = inner_[1].x;
        e.inner_l1 = inner_[0].paid;
        e.inner_l2 = inner_[1].paid;
        out_.trace.push_back(e);
    }

    // A branch above its barrier pays the excess as a lump; a branch at its
    // barrier streams its premium from then on.
    bool lump_branch(Branch& br, int branch, bool emit_events) {
        if (br.at_level || br.x < br.level) return false;
        if (br.x > br.level) {
            const double amount = br.x - br.level;
            br.x = br.level;
            br.paid += amount;
            br.paid_disc += disc_ * amount;
            if (emit_events) emit(EventKind::Lump, branch);
        }
        br.at_level = true;
        if (emit_events) emit(EventKind::RateOn, branch);
        return true;
    }

    void apply_lumps() {
        if (!transform_) {
            lump_branch(inner_[0], 1, true);
            lump_branch(inner_[1], 2, true);
            return;
        }
        // update the whole state first so every emitted snapshot is consistent
        const bool inner_changed = lump_branch(inner_[0], 1, false) | lump_branch(inner_[1], 2, false);
        const double outer_paid_before = outer2_.paid;
        const bool outer_changed = lump_branch(outer2_, 2, false);
        // realized branch 1 sits at max(X1^0, (b1/b2) X2^0); the drop is paid out
        const double y_new = max_line();
        const double amount = y_ - y_new;
        if (amount > 0.0) {
            y_paid_ += amount;
            y_paid_disc_ += disc_ * amount;
        }
        y_ = y_new;
        if (amount > 0.0) emit(EventKind::Lump, 1);
        if (outer2_.paid > outer_paid_before) emit(EventKind::Lump, 2);
        if (outer_changed) emit(EventKind::RateOn, 2);
        if (inner_changed) emit(EventKind::Lump, 0, true);
        sync_y_rate();
    }

    /// Time until `br` next changes mode; `second` is true for a recovery
    /// through zero that happens strictly below the barrier.
    static std::pair<double, bool> next_branch_event(const Branch& br) {
        if (br.at_level) return {kInfTime, false};
        if (br.x < 0.0 && br.level > 0.0) return {-br.x / br.c, true};
        if (std::isinf(br.level)) return {kInfTime, false};
        return {(br.level - br.x) / br.c, false};
    }

    void pay_rate(Branch& br, double dt, double disc_factor) {
        if (br.at_level) {
            br.paid += br.c * dt;
            br.paid_disc += br.c * disc_factor;
        } else {
            br.x += br.c * dt;
        }
    }

    void advance(double dt) {
        if (dt <= 0.0) return;
        // integral of e^{-q s} over [t, t + dt]
        const double disc_factor = std::isinf(dt) ? disc_ / p_.q : disc_ * -std::expm1(-p_.q * dt) / p_.q;
        if (transform_) {
            const double rate = y_rate();
            if (rate > 0.0) {
                y_paid_ += rate * dt;
                y_paid_disc_ += rate * disc_factor;
            }
            pay_rate(outer2_, dt, disc_factor);
        }
        pay_rate(inner_[0], dt, disc_factor);
        pay_rate(inner_[1], dt, disc_factor);
        u_[0] += p_.c1 * dt;
        u_[1] += p_.c2 * dt;
        sup_[0] = std::max(sup_[0], u_[0]);
        sup_[1] = std::max(sup_[1], u_[1]);
        t_ += dt;
        disc_ = std::exp(-p_.q * t_);
        if (transform_) y_ = max_line();
    }

    void run_until(double t_claim) {
        while (true) {
            double best = t_claim - t_;
            Mover who = Mover::Claim;
            bool recover = false;
            const auto consider = [&](double dt, Mover m, bool rec) {
                if (dt < best) {
                    best = dt;
                    who = m;
                    recover = rec;
                }
            };
            {
                auto [dt, rec] = next_branch_event(inner_[0]);
                consider(dt, Mover::Inner1, rec);
            }
            {
                auto [dt, rec] = next_branch_event(inner_[1]);
                consider(dt, Mover::Inner2, rec);
            }
            if (transform_) {
                auto [dt, rec] = next_branch_event(outer2_);
                consider(dt, Mover::Outer2, rec);
                const double a = inner_[0].x;
                const double b = ratio_ * inner_[1].x;
                const double sa = inner_[0].slope();
                const double sb = ratio_ * inner_[1].slope();
                if ((a - b) * (sa - sb) < 0.0) consider((a - b) / (sb - sa), Mover::Crossing, false);
            }
            if (who == Mover::Claim) {
                if (std::isfinite(t_claim)) advance(t_claim - t_);
                return;
            }
            advance(best);
            switch (who) {
            case Mover::Inner1: settle(inner_[0], 1, recover, transform_); break;
            case Mover::Inner2: settle(inner_[1], 2, recover, transform_); break;
            case Mover::Outer2: settle(outer2_, 2, recover, false); break;
            case Mover::Crossing:
            case Mover::Claim: break;
            }
            if (transform_) {
                y_ = max_line();
                sync_y_rate();
            }
        }
    }

    void settle(Branch& br, int branch, bool recover, bool inner_event) {
        if (recover || br.level == 0.0) {
            br.x = 0.0;
            emit(EventKind::Recover, branch, inner_event);
            if (recover) return;
        }
        br.x = br.level;
        br.at_level = true;
        emit(EventKind::RateOn, branch, inner_event);
    }

    void finish_without_claims() {
        // no further claims: integrate current rates to infinity
        run_until(kInfTime);
        advance(kInfTime);
        out_.end_time = kInfTime;
    }

    void apply_claim(double size) {
        // the whole state jumps first so every emitted snapshot is post-claim
        std::array<bool, 2> stopped{};
        for (int i = 0; i < 2; ++i) {
            Branch& br = inner_[i];
            br.x -= br.b * size;
            u_[i] -= br.b * size;
            stopped[i] = br.at_level;
            br.at_level = false;
        }
        const bool outer_stopped = transform_ && outer2_.at_level;
        if (transform_) {
            outer2_.x -= outer2_.b * size;
            outer2_.at_level = false;
            y_ = max_line();
        }
        for (int i = 0; i < 2; ++i) {
            if (stopped[i]) emit(EventKind::RateOff, i + 1, transform_);
        }
        if (outer_stopped) emit(EventKind::RateOff, 2);
        sync_y_rate();
        emit(EventKind::Claim, 0);
    }

    bool check_ruin() {
        if (transform_ && out_.inner_ruin_time == kInfTime && inner_[0].x < 0.0 && inner_[1].x < 0.0) {
            out_.inner_ruin_time = t_;
        }
        if (realized_x1() < 0.0 && realized2().x < 0.0) {
            out_.ruin_time = t_;
            out_.end_time = t_;
            if (!transform_) out_.inner_ruin_time = t_;
            emit(EventKind::Ruin, 0);
            return true;
        }
        return false;
    }

    bool check_censor() {
        const double upper = value_bounds(p_, {realized_x1(), realized2().x}).upper;
        if (disc_ * upper < cfg_.horizon_epsilon) {
            out_.censored = true;
            out_.end_time = t_;
            emit(EventKind::Censor, 0);
            return true;
        }
        return false;
    }

    const ModelParams& p_;
    const SimConfig& cfg_;
    bool transform_;
    double ratio_;
    double t_ = 0.0;
    double disc_ = 1.0;
    std::array<double, 2> u_{};
    std::array<double, 2> sup_{};
    std::array<Branch, 2> inner_{};
    Branch outer2_{};
    double y_ = 0.0;
    bool y_streaming_ = false;
    double y_paid_ = 0.0;
    double y_paid_disc_ = 0.0;
    PathOutcome out_;
};

} // namespace

PathOutcome simulate_path(const ModelParams& p, SurplusPoint x0, const StrategySpec& s, const SimConfig& cfg,
                          RandomSource& rng) {
    RandomClaims src(p, rng);
    return PathSimulator(p, x0, s, cfg).run(src);
}

PathOutcome simulate_path_scripted(const ModelParams& p, SurplusPoint x0, const StrategySpec& s,
                                   const SimConfig& cfg, std::span<const Claim> claims) {
    ScriptedClaims src(claims);
    return PathSimulator(p, x0, s, cfg).run(src);
}

} // namespace divbang
