#include "divbang/hjb.hpp"

#include "divbang/analytics.hpp"
#include "divbang/csv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace divbang {

namespace {

double uniform_step(const std::vector<double>& axis, const char* name) {
    if (axis.size() < 2) throw std::invalid_argument(std::string(name) + " needs at least two nodes");
    const double h = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
    if (!(h > 0.0)) throw std::invalid_argument(std::string(name) + " must be strictly increasing");
    for (std::size_t i = 1; i < axis.size(); ++i) {
        const double d = axis[i] - axis[i - 1];
        if (!(d > 0.0) || std::abs(d - h) > 1e-9 * std::max(1.0, h)) {
            throw std::invalid_argument(std::string(name) + " must be uniform and strictly increasing");
        }
    }
    return h;
}

/// Cell index and local coordinate in [0, 1] along one axis.
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double h, double x) {
    const double s = (x - axis.front()) / h;
    const auto last = static_cast<double>(axis.size() - 2);
    const double cell = std::clamp(std::floor(s), 0.0, last);
    return {static_cast<std::size_t>(cell), std::clamp(s - cell, 0.0, 1.0)};
}

} // namespace

GriddedFunction::GriddedFunction(std::vector<double> axis1, std::vector<double> axis2, std::vector<double> values)
    : axis1_(std::move(axis1)), axis2_(std::move(axis2)), values_(std::move(values)) {
    h1_ = uniform_step(axis1_, "x1 axis");
    h2_ = uniform_step(axis2_, "x2 axis");
    if (values_.size() != axis1_.size() * axis2_.size()) {
        throw std::invalid_argument("value matrix does not match the axes");
    }
}

GriddedFunction GriddedFunction::sample(std::vector<double> axis1, std::vector<double> axis2,
                                        const std::function<double(SurplusPoint)>& fn) {
    std::vector<double> values;
    values.reserve(axis1.size() * axis2.size());
    for (double x1 : axis1) {
        for (double x2 : axis2) values.push_back(is_solvent({x1, x2}) ? fn({x1, x2}) : 0.0);
    }
    return GriddedFunction(std::move(axis1), std::move(axis2), std::move(values));
}

bool GriddedFunction::in_hull(SurplusPoint x) const {
    constexpr double slack = 1e-12;
    return x.x1 >= axis1_.front() - slack * std::max(1.0, std::abs(axis1_.front())) &&
           x.x1 <= axis1_.back() + slack * std::max(1.0, std::abs(axis1_.back())) &&
           x.x2 >= axis2_.front() - slack * std::max(1.0, std::abs(axis2_.front())) &&
           x.x2 <= axis2_.back() + slack * std::max(1.0, std::abs(axis2_.back()));
}

double GriddedFunction::interpolate(SurplusPoint x) const {
    if (!is_solvent(x)) return 0.0;
    const auto [i, s] = locate(axis1_, h1_, x.x1);
    const auto [j, t] = locate(axis2_, h2_, x.x2);
    const double f00 = node(i, j);
    const double f10 = node(i + 1, j);
    const double f01 = node(i, j + 1);
    const double f11 = node(i + 1, j + 1);
    return (1.0 - s) * ((1.0 - t) * f00 + t * f01) + s * ((1.0 - t) * f10 + t * f11);
}

double GriddedFunction::evaluate(const ModelParams& p, SurplusPoint x) const {
    if (!is_solvent(x)) return 0.0;
    if (in_hull(x)) return interpolate(x);
    const SurplusPoint clamped{std::clamp(x.x1, axis1_.front(), axis1_.back()),
                               std::clamp(x.x2, axis2_.front(), axis2_.back())};
    const double bound = value_bounds(p, x).lower;
    if (!is_solvent(clamped)) return bound;
    const double edge = interpolate(clamped);
    const double k = p.q + p.lambda;
    // Below a nonpositive edge the branch cannot pay; the value decays
    // exponentially towards what the other branch earns on its own.
    if (x.x1 < clamped.x1 && clamped.x1 <= 0.0 && x.x2 == clamped.x2 && x.x2 >= 0.0) {
        const double floor = x.x2 + p.c2 / k;
        return floor + (edge - floor) * std::exp(k * (x.x1 - clamped.x1) / p.c1);
    }
    if (x.x2 < clamped.x2 && clamped.x2 <= 0.0 && x.x1 == clamped.x1 && x.x1 >= 0.0) {
        const double floor = x.x1 + p.c1 / k;
        return floor + (edge - floor) * std::exp(k * (x.x2 - clamped.x2) / p.c2);
    }
    return edge + bound - value_bounds(p, clamped).lower;
}

IntegralResult integral_operator(const ModelParams& p, const GriddedFunction& f, SurplusPoint x, double tolerance) {
    if (!f.in_hull(x)) throw std::invalid_argument("integral_operator: point outside the grid");
    const double alpha_max = std::max(x.x1 / p.b1, x.x2 / p.b2);
    if (!(alpha_max > 0.0)) return {};

    std::vector<double> cuts{0.0, alpha_max};
    const auto add_cut = [&](double a) {
        if (a > 0.0 && a < alpha_max) cuts.push_back(a);
    };
    for (double a : f.axis1()) add_cut((x.x1 - a) / p.b1);
    for (double a : f.axis2()) add_cut((x.x2 - a) / p.b2);
    add_cut(x.x1 / p.b1);
    add_cut(x.x2 / p.b2);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto integrand = [&](double a) {
        return f.evaluate(p, {x.x1 - p.b1 * a, x.x2 - p.b2 * a}) * p.gamma * std::exp(-p.gamma * a);
    };
    using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
    IntegralResult out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (!(cuts[k + 1] > cuts[k])) continue;
        double err = 0.0;
        out.value += Quadrature::integrate(integrand, cuts[k], cuts[k + 1], 15, tolerance, &err);
        out.error += err * std::abs(cuts[k + 1] - cuts[k]);
    }
    return out;
}

double generator(const ModelParams& p, const GriddedFunction& f, std::size_t i, std::size_t j) {
    if (i == 0 || j == 0 || i + 1 >= f.n1() || j + 1 >= f.n2()) {
        throw std::invalid_argument("generator: node is on the grid boundary");
    }
    const double fx1 = (f.node(i + 1, j) - f.node(i - 1, j)) / (2.0 * f.h1());
    const double fx2 = (f.node(i, j + 1) - f.node(i, j - 1)) / (2.0 * f.h2());
    const double v = f.node(i, j);
    const double jump = integral_operator(p, f, f.point(i, j)).value;
    return p.c1 * fx1 + p.c2 * fx2 - (p.q + p.lambda) * v + p.lambda * jump;
}

HjbResidualReport hjb_residual(const ModelParams& p, const GriddedFunction& f, double continuation_margin) {
    if (f.n1() < 5 || f.n2() < 5) throw std::invalid_argument("hjb_residual: grid must be at least 5x5");
    HjbResidualReport report;
    for (std::size_t i = 1; i + 1 < f.n1(); ++i) {
        for (std::size_t j = 1; j + 1 < f.n2(); ++j) {
            const SurplusPoint x = f.point(i, j);
            if (!is_solvent(x)) continue;
            HjbPoint pt;
            pt.x1 = x.x1;
            pt.x2 = x.x2;
            const double fx1 = (f.node(i + 1, j) - f.node(i - 1, j)) / (2.0 * f.h1());
            const double fx2 = (f.node(i, j + 1) - f.node(i, j - 1)) / (2.0 * f.h2());
            pt.term_a = x.x1 >= 0.0 ? 1.0 - fx1 : 0.0;
            pt.term_b = x.x2 >= 0.0 ? 1.0 - fx2 : 0.0;
            pt.term_c = generator(p, f, i, j);
            pt.residual = std::max({pt.term_a, pt.term_b, pt.term_c});
            report.max_violation = std::max(report.max_violation, pt.residual);
            const bool a_free = x.x1 < 0.0 || pt.term_a < -continuation_margin;
            const bool b_free = x.x2 < 0.0 || pt.term_b < -continuation_margin;
            if (a_free && b_free) {
                ++report.continuation_points;
                report.max_abs_continuation = std::max(report.max_abs_continuation, std::abs(pt.residual));
            }
            report.points.push_back(pt);
        }
    }
    return report;
}

void write_hjb_csv(std::ostream& os, const HjbResidualReport& r, const std::string& header_comment) {
    if (!header_comment.empty()) os << "# " << header_comment << '\n';
    os << "x1,x2,term_a,term_b,term_c,residual\n";
    for (const auto& pt : r.points) {
        os << csv_double(pt.x1) << ',' << csv_double(pt.x2) << ',' << csv_double(pt.term_a) << ','
           << csv_double(pt.term_b) << ',' << csv_double(pt.term_c) << ',' << csv_double(pt.residual) << '\n';
    }
    os << "# summary max_violation=" << csv_double(r.max_violation)
       << " max_abs_continuation=" << csv_double(r.max_abs_continuation)
       << " continuation_points=" << r.continuation_points << " points=" << r.points.size() << '\n';
}

} // namespace divbang
