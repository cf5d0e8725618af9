#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>

namespace divbang {

class RandomSource;

/// Raised by validate_params; `kind` tells which assumption failed.
class ParamError : public std::invalid_argument {
public:
    enum class Kind { NonPositive, ProportionSum, ProfitabilityOrder, Config };

    ParamError(Kind kind, const std::string& what)
        : std::invalid_argument(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/**
 * Parameters of the degenerate bivariate Cramer-Lundberg model.
 *
 * Both branches collect premium continuously (c1, c2) and cover the fixed
 * proportions b1, b2 of every claim of a single compound Poisson stream with
 * intensity `lambda` and Exp(gamma) claim sizes. Dividends are discounted at
 * rate q.
 */
struct ModelParams {
    double c1 = 0.0;
    double c2 = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    double q = 0.0;

    double premium(int branch) const { return branch == 1 ? c1 : c2; }
    double proportion(int branch) const { return branch == 1 ? b1 : b2; }
};

/// Checks positivity, b1 + b2 = 1 (to 1e-12) and c1/b1 >= c2/b2.
///
/// The returned copy has b2 recomputed as 1 - b1 so that claim jumps are
/// exactly colinear with (b1, b2).
ModelParams validate_params(const ModelParams& p);

/// Parameters from the numerical study: c = (2, 4), b = (0.25, 0.75),
/// lambda = 1, gamma = 0.25, q = 0.05.
ModelParams reference_params();

struct SurplusPoint {
    double x1 = 0.0;
    double x2 = 0.0;

    friend bool operator==(const SurplusPoint&, const SurplusPoint&) = default;
};

/// A point is solvent unless both coordinates are strictly negative.
inline bool is_solvent(const SurplusPoint& x) noexcept { return !(x.x1 < 0.0 && x.x2 < 0.0); }

/// Claim-size law. Only the exponential law ships; the engine goes through
/// sample()/cdf() so other laws can be slotted in.
class ClaimDistribution {
public:
    static ClaimDistribution exponential(double gamma);

    double sample(RandomSource& rng) const;
    /// Inverse-cdf transform of a uniform draw u in (0, 1].
    double from_uniform(double u) const;
    double cdf(double alpha) const;
    double density(double alpha) const;
    double mean() const;
    double rate() const noexcept { return gamma_; }

private:
    explicit ClaimDistribution(double gamma) : gamma_(gamma) {}
    double gamma_;
};

struct Claim {
    double time = 0.0;
    double size = 0.0;
};

/// Uncontrolled surplus x + c t - b S(t), counting claims that arrive at or
/// before t. Throws std::invalid_argument on unsorted claim times or t < 0.
SurplusPoint uncontrolled_surplus(const ModelParams& p, SurplusPoint x0,
                                  std::span<const Claim> claims, double t);

/// Flat `key = value` text; keys c1, c2, b1, b2, lambda, gamma, q.
/// Blank lines and `#` comments are ignored; unknown keys are errors.
std::map<std::string, double> parse_param_text(const std::string& text);
std::map<std::string, double> read_param_file(const std::filesystem::path& path);

/// Builds ModelParams from a complete key map (throws ParamError::Config when
/// a key is missing) and validates it.
ModelParams params_from_map(const std::map<std::string, double>& kv);

} // namespace divbang
