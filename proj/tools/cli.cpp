#include "cli.hpp"

#include "divbang/analytics.hpp"
#include "divbang/csv.hpp"
#include "divbang/engine.hpp"
#include "divbang/hjb.hpp"
#include "divbang/model.hpp"
#include "divbang/montecarlo.hpp"
#include "divbang/strategy.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace divbang::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::optional<double> c1, c2, b1, b2, lambda, gamma, q;
    std::uint64_t paths = 100'000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    double epsilon = 1e-6;
    std::string out;
};

void add_model_options(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "key=value parameter file")->check(CLI::ExistingFile);
    sub->add_option("--c1", c.c1, "premium rate of branch 1");
    sub->add_option("--c2", c.c2, "premium rate of branch 2");
    sub->add_option("--b1", c.b1, "claim proportion of branch 1");
    sub->add_option("--b2", c.b2, "claim proportion of branch 2");
    sub->add_option("--lambda", c.lambda, "claim intensity");
    sub->add_option("--gamma", c.gamma, "exponential claim-size rate");
    sub->add_option("--q", c.q, "discount rate");
    sub->add_option("--out", c.out, "output CSV path (stdout when absent)");
}

void add_mc_options(CLI::App* sub, Common& c) {
    sub->add_option("--paths", c.paths, "paths per estimate")->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40));
    sub->add_option("--seed", c.seed, "master seed (default: $DIVBANG_SEED or 1)");
    sub->add_option("--threads", c.threads, "worker cap, 0 for all cores");
    sub->add_option("--epsilon", c.epsilon, "censoring tail budget")->check(CLI::Range(1e-300, 0.999999));
}

ModelParams resolve_params(const Common& c) {
    std::map<std::string, double> kv;
    if (!c.config.empty()) {
        kv = read_param_file(c.config);
    } else {
        const ModelParams r = reference_params();
        kv = {{"c1", r.c1}, {"c2", r.c2}, {"b1", r.b1}, {"b2", r.b2},
              {"lambda", r.lambda}, {"gamma", r.gamma}, {"q", r.q}};
    }
    const std::pair<const char*, const std::optional<double>*> overrides[] = {
        {"c1", &c.c1}, {"c2", &c.c2}, {"b1", &c.b1}, {"b2", &c.b2},
        {"lambda", &c.lambda}, {"gamma", &c.gamma}, {"q", &c.q}};
    for (const auto& [key, value] : overrides) {
        if (value->has_value()) kv[key] = **value;
    }
    return params_from_map(kv);
}

std::uint64_t resolve_seed(const Common& c) {
    if (c.seed) return *c.seed;
    if (const char* env = std::getenv("DIVBANG_SEED"); env && *env) {
        std::uint64_t v = 0;
        std::istringstream is(env);
        if (!(is >> v) || !is.eof()) throw UsageError(std::string("DIVBANG_SEED is not an unsigned integer: ") + env);
        return v;
    }
    return 1;
}

McConfig resolve_mc(const Common& c, std::uint64_t seed) {
    McConfig mc;
    mc.n_paths = c.paths;
    mc.seed = seed;
    mc.threads = c.threads;
    mc.sim.horizon_epsilon = c.epsilon;
    return mc;
}

SurplusPoint checked_point(double x1, double x2) {
    const SurplusPoint x{x1, x2};
    if (!std::isfinite(x1) || !std::isfinite(x2)) throw UsageError("initial state must be finite");
    if (!is_solvent(x)) {
        throw UsageError(fmt::format("initial state ({}, {}) is insolvent: both branches are negative", x1, x2));
    }
    return x;
}

StrategySpec checked_strategy(const std::string& text, const ModelParams& p, SurplusPoint x0) {
    StrategySpec s;
    try {
        s = StrategySpec::parse(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (s.is_transform()) {
        if (p.b1 > p.b2) throw UsageError("transform requires b1 <= b2");
        if (region_classify(p, x0) == Region::D2) throw UsageError("transform requires the initial state in D1");
    }
    return s;
}

std::vector<double> checked_axis(double lo, double hi, double step, const char* what) {
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
        throw UsageError(fmt::format("{}: need finite min <= max and step > 0", what));
    }
    return make_axis(lo, hi, step);
}

std::string file_digest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return sha256_hex(ss.str());
}

/// Flags as given on the command line, keyed by long name. --out and
/// --threads are left out: they do not change the data.
json collect_flags(const CLI::App* sub) {
    json flags = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_name();
        if (name == "--help" || name == "--out" || name == "--threads" || opt->count() == 0) continue;
        flags[name] = opt->results();
    }
    return flags;
}

json params_json(const ModelParams& p) {
    return json{{"c1", p.c1}, {"c2", p.c2}, {"b1", p.b1}, {"b2", p.b2},
                {"lambda", p.lambda}, {"gamma", p.gamma}, {"q", p.q}};
}

struct Run {
    std::string command;
    const Common* common = nullptr;
    json identity; ///< everything that determines the data rows
    std::optional<std::uint64_t> seed;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

void emit(const Run& run, const std::string& body, std::ostream& out) {
    const std::string hash = sha256_hex(run.identity.dump());
    const std::string text = "# manifest " + hash + "\n" + body;
    const std::string& path = run.common->out;
    if (path.empty()) {
        out << text;
        return;
    }
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open output file " + path);
        os << text;
        if (!os) throw std::runtime_error("failed writing " + path);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - run.started).count();
    json manifest{{"artifact_version", kVersion},
                  {"command", run.command},
                  {"config_path", run.common->config},
                  {"flags", run.identity.at("flags")},
                  {"params", run.identity.contains("params") ? run.identity.at("params") : json()},
                  {"master_seed", run.seed ? json(*run.seed) : json()},
                  {"output_paths", json::array({path})},
                  {"wall_clock_seconds", seconds},
                  {"manifest_hash", hash}};
    std::ofstream ms(path + ".manifest.json");
    if (!ms) throw std::runtime_error("cannot write manifest for " + path);
    ms << manifest.dump(2) << '\n';
}

Run start_run(const std::string& command, const CLI::App* sub, const Common& c) {
    Run run;
    run.command = command;
    run.common = &c;
    run.identity = json{{"version", kVersion}, {"command", command}, {"flags", collect_flags(sub)}};
    return run;
}

} // namespace

std::string sha256_hex(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dividend strategies in the degenerate bivariate Cramer-Lundberg model", "divbang"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kVersion);

    Common est_c, sweep_c, grid_c, solve_c, bounds_c, hjb_c, sim_c;
    std::string est_strategy, sim_strategy, hjb_grid, hjb_column = "v1";
    double est_x1 = 0, est_x2 = 0, sweep_x1 = 25, sweep_x2 = 25, bounds_x1 = 0, bounds_x2 = 0, sim_x1 = 0,
           sim_x2 = 0;
    int sweep_branch = 1, solve_branch = 1;
    double sweep_min = 0, sweep_max = 0, sweep_step = 0;
    double g_x1_min = 0, g_x1_max = 0, g_x2_min = 0, g_x2_max = 0, g_step = 0, g_b1 = 8.0, g_b2 = 18.35;
    double lambda_div = 0, hjb_margin = 0;
    std::uint64_t sim_index = 0;

    auto* est = app.add_subcommand("estimate", "Monte-Carlo value of one strategy");
    add_model_options(est, est_c);
    add_mc_options(est, est_c);
    est->add_option("--strategy", est_strategy, "bang1:<b>, bang2:<b>, greedy, none, barriers:<l1>,<l2>, transform(<s>)")
        ->required();
    est->add_option("--x1", est_x1, "initial surplus of branch 1")->required();
    est->add_option("--x2", est_x2, "initial surplus of branch 2")->required();

    auto* sweep = app.add_subcommand("sweep", "value of Bang1/Bang2 over barrier levels");
    add_model_options(sweep, sweep_c);
    add_mc_options(sweep, sweep_c);
    sweep->add_option("--branch", sweep_branch, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
    sweep->add_option("--min", sweep_min, "lowest barrier")->required();
    sweep->add_option("--max", sweep_max, "highest barrier")->required();
    sweep->add_option("--step", sweep_step, "barrier step")->required();
    sweep->add_option("--x1", sweep_x1, "initial surplus of branch 1")->capture_default_str();
    sweep->add_option("--x2", sweep_x2, "initial surplus of branch 2")->capture_default_str();

    auto* grid = app.add_subcommand("grid", "Bang1 and Bang2 values over initial capital");
    add_model_options(grid, grid_c);
    add_mc_options(grid, grid_c);
    grid->add_option("--x1-min", g_x1_min)->required();
    grid->add_option("--x1-max", g_x1_max)->required();
    grid->add_option("--x2-min", g_x2_min)->required();
    grid->add_option("--x2-max", g_x2_max)->required();
    grid->add_option("--step", g_step)->required();
    grid->add_option("--b1-opt", g_b1, "Bang1 barrier")->capture_default_str();
    grid->add_option("--b2-opt", g_b2, "Bang2 barrier")->capture_default_str();

    auto* solve = app.add_subcommand("solve-barrier", "barrier fixed point for a constant reward rate");
    add_model_options(solve, solve_c);
    solve->add_option("--branch", solve_branch, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
    solve->add_option("--lambda-div", lambda_div, "reward rate of the other branch")->required()->check(
        CLI::NonNegativeNumber);

    auto* bounds = app.add_subcommand("bounds", "lower and upper value bounds");
    add_model_options(bounds, bounds_c);
    bounds->add_option("--x1", bounds_x1)->required();
    bounds->add_option("--x2", bounds_x2)->required();

    auto* hjb = app.add_subcommand("hjb-check", "HJB residual of a grid CSV");
    add_model_options(hjb, hjb_c);
    hjb->add_option("--grid", hjb_grid, "grid CSV from the grid command")->required()->check(CLI::ExistingFile);
    hjb->add_option("--column", hjb_column, "value column")->capture_default_str()->check(CLI::IsMember({"v1", "v2"}));
    hjb->add_option("--margin", hjb_margin, "continuation margin")->capture_default_str()->check(CLI::NonNegativeNumber);

    auto* sim = app.add_subcommand("simulate", "event trace of one path");
    add_model_options(sim, sim_c);
    add_mc_options(sim, sim_c);
    sim->add_option("--strategy", sim_strategy)->required();
    sim->add_option("--x1", sim_x1)->required();
    sim->add_option("--x2", sim_x2)->required();
    sim->add_option("--path-index", sim_index, "path stream index")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        std::ostringstream body;
        if (*est) {
            const ModelParams p = resolve_params(est_c);
            const SurplusPoint x0 = checked_point(est_x1, est_x2);
            const StrategySpec s = checked_strategy(est_strategy, p, x0);
            Run run = start_run("estimate", est, est_c);
            run.seed = resolve_seed(est_c);
            run.identity["params"] = params_json(p);
            run.identity["seed"] = *run.seed;
            const Estimate e = estimate_value(p, x0, s, resolve_mc(est_c, *run.seed));
            write_estimate_csv(body, s.to_string(), x0, e);
            emit(run, body.str(), out);
        } else if (*sweep) {
            const ModelParams p = resolve_params(sweep_c);
            const SurplusPoint x0 = checked_point(sweep_x1, sweep_x2);
            const auto levels = checked_axis(sweep_min, sweep_max, sweep_step, "barrier range");
            if (levels.front() < 0.0) throw UsageError("barrier levels must be nonnegative");
            Run run = start_run("sweep", sweep, sweep_c);
            run.seed = resolve_seed(sweep_c);
            run.identity["params"] = params_json(p);
            run.identity["seed"] = *run.seed;
            const SweepResult r = sweep_barrier(p, x0, sweep_branch, levels, resolve_mc(sweep_c, *run.seed));
            write_sweep_csv(body, r);
            emit(run, body.str(), out);
        } else if (*grid) {
            const ModelParams p = resolve_params(grid_c);
            const auto a1 = checked_axis(g_x1_min, g_x1_max, g_step, "x1 range");
            const auto a2 = checked_axis(g_x2_min, g_x2_max, g_step, "x2 range");
            if (g_b1 < 0.0 || g_b2 < 0.0) throw UsageError("barrier levels must be nonnegative");
            Run run = start_run("grid", grid, grid_c);
            run.seed = resolve_seed(grid_c);
            run.identity["params"] = params_json(p);
            run.identity["seed"] = *run.seed;
            const GridResult r = grid_values(p, a1, a2, g_b1, g_b2, resolve_mc(grid_c, *run.seed));
            write_grid_csv(body, r);
            emit(run, body.str(), out);
        } else if (*solve) {
            const ModelParams p = resolve_params(solve_c);
            Run run = start_run("solve-barrier", solve, solve_c);
            run.identity["params"] = params_json(p);
            const BarrierSolve s = solve_barrier(p, solve_branch, lambda_div);
            body << "branch,lambda_div,x_star,R1,R2,residual,iterations\n"
                 << solve_branch << ',' << csv_double(s.lambda_div) << ',' << csv_double(s.x_star) << ','
                 << csv_double(s.roots.r1) << ',' << csv_double(s.roots.r2) << ',' << csv_double(s.residual) << ','
                 << s.iterations << '\n';
            emit(run, body.str(), out);
        } else if (*bounds) {
            const ModelParams p = resolve_params(bounds_c);
            const SurplusPoint x = checked_point(bounds_x1, bounds_x2);
            Run run = start_run("bounds", bounds, bounds_c);
            run.identity["params"] = params_json(p);
            const BoundsResult b = value_bounds(p, x);
            body << "x1,x2,lower,upper\n"
                 << csv_double(x.x1) << ',' << csv_double(x.x2) << ',' << csv_double(b.lower) << ','
                 << csv_double(b.upper) << '\n';
            emit(run, body.str(), out);
        } else if (*hjb) {
            const ModelParams p = resolve_params(hjb_c);
            Run run = start_run("hjb-check", hjb, hjb_c);
            run.identity["params"] = params_json(p);
            run.identity["grid_sha256"] = file_digest(hjb_grid);
            std::ifstream is(hjb_grid);
            const GridResult g = read_grid_csv(is);
            std::vector<double> values;
            values.reserve(g.rows.size());
            for (const GridRow& row : g.rows) values.push_back(hjb_column == "v1" ? row.v1.mean : row.v2.mean);
            const GriddedFunction f(g.axis1, g.axis2, std::move(values));
            const HjbResidualReport r = hjb_residual(p, f, hjb_margin);
            write_hjb_csv(body, r);
            emit(run, body.str(), out);
        } else if (*sim) {
            const ModelParams p = resolve_params(sim_c);
            const SurplusPoint x0 = checked_point(sim_x1, sim_x2);
            const StrategySpec s = checked_strategy(sim_strategy, p, x0);
            Run run = start_run("simulate", sim, sim_c);
            run.seed = resolve_seed(sim_c);
            run.identity["params"] = params_json(p);
            run.identity["seed"] = *run.seed;
            SimConfig cfg;
            cfg.horizon_epsilon = sim_c.epsilon;
            cfg.trace_enabled = true;
            RandomSource rng = RandomSource::for_path(*run.seed, sim_index);
            const PathOutcome o = simulate_path(p, x0, s, cfg, rng);
            write_trace_csv(body, o.trace);
            emit(run, body.str(), out);
        }
        return 0;
    } catch (const UsageError& e) {
        err << "divbang: " << e.what() << '\n';
        return 2;
    } catch (const ParamError& e) {
        err << "divbang: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "divbang: " << e.what() << '\n';
        return 1;
    }
}

} // namespace divbang::cli
