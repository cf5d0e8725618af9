#include "divbang/model.hpp"

#include "divbang/random.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace divbang {

double RandomSource::exponential(double rate) noexcept {
    return -std::log(uniform_open0()) / rate;
}

ModelParams validate_params(const ModelParams& p) {
    const std::pair<const char*, double> fields[] = {
        {"c1", p.c1}, {"c2", p.c2}, {"b1", p.b1}, {"b2", p.b2},
        {"lambda", p.lambda}, {"gamma", p.gamma}, {"q", p.q}};
    for (const auto& [name, value] : fields) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw ParamError(ParamError::Kind::NonPositive,
                             std::string("parameter ") + name + " must be positive and finite");
        }
    }
    if (std::abs(p.b1 + p.b2 - 1.0) > 1e-12) {
        throw ParamError(ParamError::Kind::ProportionSum, "claim proportions must satisfy b1 + b2 = 1");
    }
    // c1/b1 >= c2/b2, compared without division on the caller's values
    if (p.c1 * p.b2 < p.c2 * p.b1) {
        throw ParamError(ParamError::Kind::ProfitabilityOrder,
                         "branch one must be at least as profitable: c1/b1 >= c2/b2");
    }
    ModelParams out = p;
    out.b2 = 1.0 - p.b1;
    return out;
}

ModelParams reference_params() {
    return validate_params(ModelParams{.c1 = 2.0, .c2 = 4.0, .b1 = 0.25, .b2 = 0.75,
                                       .lambda = 1.0, .gamma = 0.25, .q = 0.05});
}

ClaimDistribution ClaimDistribution::exponential(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("exponential claim rate must be positive");
    return ClaimDistribution(gamma);
}

double ClaimDistribution::sample(RandomSource& rng) const { return from_uniform(rng.uniform_open0()); }

double ClaimDistribution::from_uniform(double u) const { return -std::log(u) / gamma_; }

double ClaimDistribution::cdf(double alpha) const {
    return alpha <= 0.0 ? 0.0 : -std::expm1(-gamma_ * alpha);
}

double ClaimDistribution::density(double alpha) const {
    return alpha < 0.0 ? 0.0 : gamma_ * std::exp(-gamma_ * alpha);
}

double ClaimDistribution::mean() const { return 1.0 / gamma_; }

SurplusPoint uncontrolled_surplus(const ModelParams& p, SurplusPoint x0,
                                  std::span<const Claim> claims, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
    double total = 0.0;
    for (std::size_t i = 0; i < claims.size(); ++i) {
        if (i > 0 && !(claims[i].time > claims[i - 1].time)) {
            throw std::invalid_argument("claim times must be strictly increasing");
        }
        if (claims[i].time <= t) total += claims[i].size;
    }
    return {x0.x1 + p.c1 * t - p.b1 * total, x0.x2 + p.c2 * t - p.b2 * total};
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{"c1", "c2", "b1", "b2", "lambda", "gamma", "q"};
    return keys;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

std::map<std::string, double> parse_param_text(const std::string& text) {
    std::map<std::string, double> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParamError(ParamError::Kind::Config,
                             "line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys().contains(key)) {
            throw ParamError(ParamError::Kind::Config,
                             "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value.size()) {
            throw ParamError(ParamError::Kind::Config,
                             "line " + std::to_string(lineno) + ": bad number for '" + key + "'");
        }
        kv[key] = v;
    }
    return kv;
}

std::map<std::string, double> read_param_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParamError(ParamError::Kind::Config, "cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_param_text(buf.str());
}

ModelParams params_from_map(const std::map<std::string, double>& kv) {
    for (const auto& key : known_keys()) {
        if (!kv.contains(key)) throw ParamError(ParamError::Kind::Config, "missing parameter '" + key + "'");
    }
    return validate_params(ModelParams{.c1 = kv.at("c1"), .c2 = kv.at("c2"), .b1 = kv.at("b1"),
                                       .b2 = kv.at("b2"), .lambda = kv.at("lambda"),
                                       .gamma = kv.at("gamma"), .q = kv.at("q")});
}

} // namespace divbang
