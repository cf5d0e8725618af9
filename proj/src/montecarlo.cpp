#include "divbang/montecarlo.hpp"

#include "divbang/csv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace divbang {

namespace {

constexpr double kZ95 = 1.959963984540054;

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

void write_comment(std::ostream& os, const std::string& header_comment) {
    if (!header_comment.empty()) os << "# " << header_comment << '\n';
}

unsigned resolve_threads(unsigned threads) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    return threads;
}

void check_paths(const McConfig& mc) {
    if (mc.n_paths < 2) throw std::invalid_argument("at least two paths are required");
    mc.sim.validate();
}

} // namespace

void parallel_for(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t)>& fn) {
    threads = static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), std::max<std::uint64_t>(n, 1)));
    if (threads <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    constexpr std::uint64_t kChunk = 256;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::uint64_t begin = next.fetch_add(kChunk);
                if (begin >= n) return;
                const std::uint64_t end = std::min(n, begin + kChunk);
                try {
                    for (std::uint64_t i = begin; i < end; ++i) fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

Estimate summarize(std::span<const double> samples, std::uint64_t censored, std::uint64_t seed) {
    const std::uint64_t n = samples.size();
    if (n < 2) throw std::invalid_argument("summarize: need at least two samples");
    CompensatedSum sum;
    for (double v : samples) sum.add(v);
    const double mean = sum.value() / static_cast<double>(n);
    CompensatedSum sq;
    for (double v : samples) sq.add((v - mean) * (v - mean));
    const double var = sq.value() / static_cast<double>(n - 1);
    Estimate e;
    e.mean = mean;
    e.std_error = std::sqrt(var / static_cast<double>(n));
    e.ci_low = mean - kZ95 * e.std_error;
    e.ci_high = mean + kZ95 * e.std_error;
    e.n_paths = n;
    e.censored_fraction = static_cast<double>(censored) / static_cast<double>(n);
    e.master_seed = seed;
    return e;
}

Estimate estimate_value(const ModelParams& p, SurplusPoint x0, const StrategySpec& s, const McConfig& mc) {
    check_paths(mc);
    if (!is_solvent(x0)) throw SimulationError("initial state is insolvent");
    std::vector<double> values(mc.n_paths);
    std::vector<unsigned char> censored(mc.n_paths);
    parallel_for(mc.n_paths, mc.threads, [&](std::uint64_t i) {
        RandomSource rng = RandomSource::for_path(mc.seed, i);
        const PathOutcome out = simulate_path(p, x0, s, mc.sim, rng);
        values[i] = out.value();
        censored[i] = out.censored ? 1 : 0;
    });
    const auto n_censored = static_cast<std::uint64_t>(std::count(censored.begin(), censored.end(), 1));
    return summarize(values, n_censored, mc.seed);
}

Estimate compare_strategies(const ModelParams& p, SurplusPoint x0, const StrategySpec& a, const StrategySpec& b,
                            const McConfig& mc) {
    check_paths(mc);
    if (!is_solvent(x0)) throw SimulationError("initial state is insolvent");
    std::vector<double> diffs(mc.n_paths);
    std::vector<unsigned char> censored(mc.n_paths);
    parallel_for(mc.n_paths, mc.threads, [&](std::uint64_t i) {
        RandomSource rng_a = RandomSource::for_path(mc.seed, i);
        RandomSource rng_b = RandomSource::for_path(mc.seed, i);
        const PathOutcome oa = simulate_path(p, x0, a, mc.sim, rng_a);
        const PathOutcome ob = simulate_path(p, x0, b, mc.sim, rng_b);
        diffs[i] = oa.value() - ob.value();
        censored[i] = (oa.censored || ob.censored) ? 1 : 0;
    });
    const auto n_censored = static_cast<std::uint64_t>(std::count(censored.begin(), censored.end(), 1));
    return summarize(diffs, n_censored, mc.seed);
}

const SweepRow& SweepResult::argmax() const {
    if (rows.empty()) throw std::logic_error("empty sweep");
    return *std::max_element(rows.begin(), rows.end(), [](const SweepRow& l, const SweepRow& r) {
        return l.estimate.mean < r.estimate.mean;
    });
}

SweepResult sweep_barrier(const ModelParams& p, SurplusPoint x0, int branch, std::span<const double> levels,
                          const McConfig& mc) {
    if (branch != 1 && branch != 2) throw std::invalid_argument("branch must be 1 or 2");
    if (levels.empty()) throw std::invalid_argument("sweep needs at least one barrier level");
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (!(levels[i] > levels[i - 1])) throw std::invalid_argument("barrier levels must be strictly increasing");
    }
    SweepResult r;
    r.branch = branch;
    for (double level : levels) {
        const StrategySpec s = branch == 1 ? StrategySpec(Bang1{level}) : StrategySpec(Bang2{level});
        r.rows.push_back({level, estimate_value(p, x0, s, mc)});
    }
    return r;
}

std::vector<double> make_axis(double min, double max, double step) {
    if (!(step > 0.0) || !(max >= min)) throw std::invalid_argument("axis needs step > 0 and max >= min");
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> axis(n);
    for (std::size_t i = 0; i < n; ++i) axis[i] = min + static_cast<double>(i) * step;
    return axis;
}

std::vector<Estimate> estimate_on_grid(const ModelParams& p, std::span<const double> axis1,
                                       std::span<const double> axis2, const StrategySpec& s, const McConfig& mc) {
    if (axis1.empty() || axis2.empty()) throw std::invalid_argument("grid axes must be nonempty");
    std::vector<Estimate> out;
    out.reserve(axis1.size() * axis2.size());
    for (double x1 : axis1) {
        for (double x2 : axis2) {
            const SurplusPoint x{x1, x2};
            if (!is_solvent(x)) {
                Estimate zero;
                zero.n_paths = 0;
                zero.master_seed = mc.seed;
                out.push_back(zero);
                continue;
            }
            out.push_back(estimate_value(p, x, s, mc));
        }
    }
    return out;
}

GridResult grid_values(const ModelParams& p, std::span<const double> axis1, std::span<const double> axis2,
                       double b1_opt, double b2_opt, const McConfig& mc) {
    const auto v1 = estimate_on_grid(p, axis1, axis2, Bang1{b1_opt}, mc);
    const auto v2 = estimate_on_grid(p, axis1, axis2, Bang2{b2_opt}, mc);
    GridResult g;
    g.axis1.assign(axis1.begin(), axis1.end());
    g.axis2.assign(axis2.begin(), axis2.end());
    std::size_t k = 0;
    for (double x1 : axis1) {
        for (double x2 : axis2) {
            g.rows.push_back({x1, x2, is_solvent({x1, x2}), v1[k], v2[k]});
            ++k;
        }
    }
    return g;
}

void write_estimate_csv(std::ostream& os, const std::string& strategy, SurplusPoint x0, const Estimate& e,
                        const std::string& header_comment) {
    write_comment(os, header_comment);
    os << "strategy,x1,x2,n_paths,mean,stderr,ci_low,ci_high,censored_frac,seed\n";
    os << strategy << ',' << csv_double(x0.x1) << ',' << csv_double(x0.x2) << ',' << e.n_paths << ','
       << csv_double(e.mean) << ',' << csv_double(e.std_error) << ',' << csv_double(e.ci_low) << ','
       << csv_double(e.ci_high) << ',' << csv_double(e.censored_fraction) << ',' << e.master_seed << '\n';
}

void write_sweep_csv(std::ostream& os, const SweepResult& r, const std::string& header_comment) {
    write_comment(os, header_comment);
    os << "branch,barrier,mean,stderr,ci_low,ci_high\n";
    for (const auto& row : r.rows) {
        os << r.branch << ',' << csv_double(row.barrier) << ',' << csv_double(row.estimate.mean) << ','
           << csv_double(row.estimate.std_error) << ',' << csv_double(row.estimate.ci_low) << ','
           << csv_double(row.estimate.ci_high) << '\n';
    }
}

void write_grid_csv(std::ostream& os, const GridResult& r, const std::string& header_comment) {
    write_comment(os, header_comment);
    os << "x1,x2,v1_mean,v1_stderr,v2_mean,v2_stderr\n";
    for (const auto& row : r.rows) {
        os << csv_double(row.x1) << ',' << csv_double(row.x2) << ',' << csv_double(row.v1.mean) << ','
           << csv_double(row.v1.std_error) << ',' << csv_double(row.v2.mean) << ','
           << csv_double(row.v2.std_error) << '\n';
    }
}

GridResult read_grid_csv(std::istream& is) {
    std::string line;
    bool header_seen = false;
    std::map<std::pair<double, double>, GridRow> by_point;
    std::vector<double> xs1, xs2;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "x1,x2,v1_mean,v1_stderr,v2_mean,v2_stderr") {
                throw std::runtime_error("grid CSV: unexpected header '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("grid CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (vals.size() != 6) throw std::runtime_error("grid CSV line " + std::to_string(lineno) + ": expected 6 columns");
        GridRow row;
        row.x1 = vals[0];
        row.x2 = vals[1];
        row.solvent = is_solvent({row.x1, row.x2});
        row.v1.mean = vals[2];
        row.v1.std_error = vals[3];
        row.v2.mean = vals[4];
        row.v2.std_error = vals[5];
        by_point[{row.x1, row.x2}] = row;
        xs1.push_back(row.x1);
        xs2.push_back(row.x2);
    }
    if (!header_seen) throw std::runtime_error("grid CSV: missing header");
    if (by_point.empty()) throw std::runtime_error("grid CSV: no data rows");
    const auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(xs1);
    uniq(xs2);
    if (by_point.size() != xs1.size() * xs2.size()) throw std::runtime_error("grid CSV: points do not form a full grid");
    GridResult g;
    g.axis1 = xs1;
    g.axis2 = xs2;
    for (double x1 : xs1) {
        for (double x2 : xs2) g.rows.push_back(by_point.at({x1, x2}));
    }
    return g;
}

} // namespace divbang
