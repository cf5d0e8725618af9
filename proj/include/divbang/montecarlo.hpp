#pragma once

#include "divbang/engine.hpp"
#include "divbang/model.hpp"
#include "divbang/strategy.hpp"

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace divbang {

/// Sample mean of discounted dividends with a 95% normal confidence interval.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t n_paths = 0;
    double censored_fraction = 0.0;
    std::uint64_t master_seed = 0;
};

/// Monte-Carlo run settings shared by all estimators. Path i always uses
/// RandomSource::for_path(seed, i), so every estimator with the same seed
/// sees the same claim sequences (common random numbers).
struct McConfig {
    std::uint64_t n_paths = 100'000;
    std::uint64_t seed = 0;
    SimConfig sim{};
    unsigned threads = 0; ///< 0: hardware concurrency
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t)>& fn);

/// Estimate from per-path samples; summation is compensated and in index order.
Estimate summarize(std::span<const double> samples, std::uint64_t censored, std::uint64_t seed);

Estimate estimate_value(const ModelParams& p, SurplusPoint x0, const StrategySpec& s, const McConfig& mc);

/// Paired estimate of V^a - V^b; both strategies run on the same claim paths.
Estimate compare_strategies(const ModelParams& p, SurplusPoint x0, const StrategySpec& a,
                            const StrategySpec& b, const McConfig& mc);

struct SweepRow {
    double barrier = 0.0;
    Estimate estimate;
};

struct SweepResult {
    int branch = 1;
    std::vector<SweepRow> rows;

    /// Row with the largest mean.
    const SweepRow& argmax() const;
};

/// Value of Bang1(level) (branch 1) or Bang2(level) (branch 2) for every
/// level, all on common random numbers. Levels must be strictly increasing.
SweepResult sweep_barrier(const ModelParams& p, SurplusPoint x0, int branch, std::span<const double> levels,
                          const McConfig& mc);

/// min, min + step, ..., max (max included when it lies on the lattice).
std::vector<double> make_axis(double min, double max, double step);

struct GridRow {
    double x1 = 0.0;
    double x2 = 0.0;
    bool solvent = true; ///< insolvent points are skipped and hold zeros
    Estimate v1;         ///< Bang1(b1_opt)
    Estimate v2;         ///< Bang2(b2_opt)
};

struct GridResult {
    std::vector<double> axis1;
    std::vector<double> axis2;
    std::vector<GridRow> rows; ///< x1-major: rows[i * axis2.size() + j]
};

/// Estimates of one strategy on a grid (x1-major), insolvent points zero.
std::vector<Estimate> estimate_on_grid(const ModelParams& p, std::span<const double> axis1,
                                       std::span<const double> axis2, const StrategySpec& s,
                                       const McConfig& mc);

GridResult grid_values(const ModelParams& p, std::span<const double> axis1, std::span<const double> axis2,
                       double b1_opt, double b2_opt, const McConfig& mc);

// CSV writers; `header_comment`, when nonempty, is written first as "# ...".
void write_estimate_csv(std::ostream& os, const std::string& strategy, SurplusPoint x0, const Estimate& e,
                        const std::string& header_comment = {});
void write_sweep_csv(std::ostream& os, const SweepResult& r, const std::string& header_comment = {});
void write_grid_csv(std::ostream& os, const GridResult& r, const std::string& header_comment = {});

/// Reads a grid CSV (`x1,x2,v1_mean,v1_stderr,v2_mean,v2_stderr`), skipping
/// comment lines. Throws std::runtime_error on schema errors.
GridResult read_grid_csv(std::istream& is);

} // namespace divbang
