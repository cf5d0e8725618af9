#pragma once

#include "divbang/model.hpp"

#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace divbang {

/**
 * Candidate value function sampled on a uniform rectangular grid.
 *
 * Values are stored x1-major (values[i * n2 + j] at (axis1[i], axis2[j])).
 * The function is zero on the insolvent quadrant, bilinear inside the grid
 * and extended outside it. Below a nonpositive lower edge the value decays
 * exponentially towards the other branch's stand-alone value, anchored at
 * the edge; elsewhere it follows the shape of the lower value bound:
 * f(p) = f(p_c) + B(p) - B(p_c) with p_c the nearest hull point.
 */
class GriddedFunction {
public:
    GriddedFunction(std::vector<double> axis1, std::vector<double> axis2, std::vector<double> values);

    /// Samples `fn` at every grid node.
    static GriddedFunction sample(std::vector<double> axis1, std::vector<double> axis2,
                                  const std::function<double(SurplusPoint)>& fn);

    std::size_t n1() const { return axis1_.size(); }
    std::size_t n2() const { return axis2_.size(); }
    double h1() const { return h1_; }
    double h2() const { return h2_; }
    const std::vector<double>& axis1() const { return axis1_; }
    const std::vector<double>& axis2() const { return axis2_; }
    double node(std::size_t i, std::size_t j) const { return values_[i * n2() + j]; }
    SurplusPoint point(std::size_t i, std::size_t j) const { return {axis1_[i], axis2_[j]}; }

    bool in_hull(SurplusPoint x) const;
    /// Bilinear value inside the hull (zero on the insolvent quadrant).
    double interpolate(SurplusPoint x) const;
    /// Value anywhere, extrapolating outside the hull.
    double evaluate(const ModelParams& p, SurplusPoint x) const;

private:
    std::vector<double> axis1_;
    std::vector<double> axis2_;
    std::vector<double> values_;
    double h1_ = 0.0;
    double h2_ = 0.0;
};

struct IntegralResult {
    double value = 0.0;
    double error = 0.0; ///< quadrature error estimate
};

/// Expected value of f right after a claim hitting x, over the claim sizes
/// that leave the point solvent-or-zero:
///   integral over [0, max(x1/b1, x2/b2)] of f(x1 - b1 a, x2 - b2 a) dF(a).
/// Requires x inside the grid hull. The range is split at grid-line
/// crossings and axis crossings; each piece uses adaptive Gauss-Kronrod.
IntegralResult integral_operator(const ModelParams& p, const GriddedFunction& f, SurplusPoint x,
                                 double tolerance = 1e-10);

/// c1 f_x1 + c2 f_x2 - (q + lambda) f + lambda I(f) at interior node (i, j),
/// with central differences.
double generator(const ModelParams& p, const GriddedFunction& f, std::size_t i, std::size_t j);

struct HjbPoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double term_a = 0.0; ///< 1{x1 >= 0} (1 - f_x1)
    double term_b = 0.0; ///< 1{x2 >= 0} (1 - f_x2)
    double term_c = 0.0; ///< generator
    double residual = 0.0;
};

struct HjbResidualReport {
    std::vector<HjbPoint> points;
    /// max |residual| over points where neither derivative constraint binds
    /// (each active term below -continuation_margin).
    double max_abs_continuation = 0.0;
    std::size_t continuation_points = 0;
    /// max(0, max residual) over all interior points.
    double max_violation = 0.0;
};

/// HJB max-residual at every solvent interior node. Needs at least 5x5 nodes.
HjbResidualReport hjb_residual(const ModelParams& p, const GriddedFunction& f, double continuation_margin = 0.0);

/// CSV `x1,x2,term_a,term_b,term_c,residual` and a trailing `# summary` line.
void write_hjb_csv(std::ostream& os, const HjbResidualReport& r, const std::string& header_comment = {});

} // namespace divbang
