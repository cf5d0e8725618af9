#include "doctest.h"

#include "divbang/model.hpp"
#include "divbang/random.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

using namespace divbang;

namespace {

ModelParams make(double c1, double c2, double b1, double b2) {
    ModelParams p;
    p.c1 = c1;
    p.c2 = c2;
    p.b1 = b1;
    p.b2 = b2;
    p.lambda = 1.0;
    p.gamma = 0.25;
    p.q = 0.05;
    return p;
}

ParamError::Kind kind_of(const ModelParams& p) {
    try {
        validate_params(p);
    } catch (const ParamError& e) {
        return e.kind();
    }
    FAIL("expected a ParamError");
    return ParamError::Kind::Config;
}

} // namespace

TEST_CASE("reference parameters are accepted") {
    const ModelParams p = validate_params(make(2, 4, 0.25, 0.75));
    CHECK(p.c1 == 2.0);
    CHECK(p.b2 == 0.75);
    CHECK(reference_params().gamma == 0.25);
}

TEST_CASE("equal profitability is permitted") {
    CHECK_NOTHROW(validate_params(make(1, 1, 0.5, 0.5)));
}

TEST_CASE("each violated assumption has its own error kind") {
    CHECK(kind_of(make(1, 4, 0.5, 0.5)) == ParamError::Kind::ProfitabilityOrder);
    CHECK(kind_of(make(2, 4, 0.25, 0.7)) == ParamError::Kind::ProportionSum);
    CHECK(kind_of(make(0, 4, 0.25, 0.75)) == ParamError::Kind::NonPositive);
    ModelParams p = make(2, 4, 0.25, 0.75);
    p.q = -0.01;
    CHECK(kind_of(p) == ParamError::Kind::NonPositive);
    p = make(2, 4, 0.25, 0.75);
    p.lambda = std::nan("");
    CHECK(kind_of(p) == ParamError::Kind::NonPositive);
}

TEST_CASE("b2 is recomputed from b1 within the tolerance") {
    const ModelParams p = validate_params(make(2, 4, 0.25, 0.75 + 5e-13));
    CHECK(p.b1 + p.b2 == 1.0);
    CHECK(p.b2 == 1.0 - 0.25);
}

TEST_CASE("solvency excludes only the open negative quadrant") {
    CHECK(is_solvent({-1.0, 0.5}));
    CHECK(is_solvent({0.0, 0.0}));
    CHECK(is_solvent({3.0, -7.0}));
    CHECK_FALSE(is_solvent({-1.0, -0.001}));
}

TEST_CASE("exponential claims by inversion") {
    const ClaimDistribution d = ClaimDistribution::exponential(0.25);
    CHECK(d.from_uniform(0.5) == doctest::Approx(-std::log(0.5) / 0.25).epsilon(1e-15));
    CHECK(d.from_uniform(0.5) == doctest::Approx(2.77259).epsilon(1e-5));
    CHECK(d.from_uniform(1.0) == 0.0);
    CHECK(d.from_uniform(1.0 - 1e-12) < 1e-10);
    CHECK(d.mean() == 4.0);

    SUBCASE("cdf is a distribution function") {
        CHECK(d.cdf(-1.0) == 0.0);
        CHECK(d.cdf(0.0) == 0.0);
        double prev = 0.0;
        for (double a = 0.0; a < 200.0; a += 0.5) {
            CHECK(d.cdf(a) >= prev);
            prev = d.cdf(a);
        }
        CHECK(d.cdf(1e6) == doctest::Approx(1.0));
        CHECK(d.cdf(16.0) == doctest::Approx(1.0 - std::exp(-4.0)));
        CHECK(d.density(2.0) == doctest::Approx(0.25 * std::exp(-0.5)));
    }

    SUBCASE("sample mean of one million draws") {
        RandomSource rng(12345);
        double sum = 0.0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) {
            const double u = d.sample(rng);
            REQUIRE(u >= 0.0);
            sum += u;
        }
        CHECK(std::abs(sum / n - 4.0) < 0.02);
    }
}

TEST_CASE("random streams are reproducible and path-separated") {
    RandomSource a = RandomSource::for_path(7, 3);
    RandomSource b = RandomSource::for_path(7, 3);
    RandomSource c = RandomSource::for_path(7, 4);
    RandomSource d = RandomSource::for_path(8, 3);
    int same_c = 0, same_d = 0;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        same_c += va == c.next_u64();
        same_d += va == d.next_u64();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
    RandomSource u(1);
    for (int i = 0; i < 10000; ++i) {
        const double x = u.uniform_open0();
        REQUIRE(x > 0.0);
        REQUIRE(x <= 1.0);
    }
}

TEST_CASE("uncontrolled surplus") {
    const ModelParams p = reference_params();
    CHECK(uncontrolled_surplus(p, {1, 2}, {}, 3.0) == SurplusPoint{7, 14});
    const std::vector<Claim> one{{1.0, 4.0}};
    const SurplusPoint at1 = uncontrolled_surplus(p, {0, 0}, one, 1.0);
    CHECK(at1.x1 == doctest::Approx(1.0));
    CHECK(at1.x2 == doctest::Approx(1.0));
    CHECK(uncontrolled_surplus(p, {1.5, -2}, one, 0.0) == SurplusPoint{1.5, -2});
    const std::vector<Claim> unsorted{{2.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(uncontrolled_surplus(p, {0, 0}, unsorted, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(uncontrolled_surplus(p, {0, 0}, one, -1.0), std::invalid_argument);
}

TEST_CASE("uncontrolled surplus matches a step-by-step replay") {
    const ModelParams p = reference_params();
    std::mt19937_64 gen(99);
    std::exponential_distribution<double> inter(1.0), size(0.25);
    std::uniform_real_distribution<double> start(-10.0, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<Claim> claims;
        double t = 0.0;
        for (int k = 0; k < 20; ++k) {
            t += inter(gen);
            claims.push_back({t, size(gen)});
        }
        const SurplusPoint x0{start(gen), start(gen)};
        const double T = t * 0.8;
        double x1 = x0.x1, x2 = x0.x2, now = 0.0;
        for (const Claim& c : claims) {
            if (c.time > T) break;
            x1 += p.c1 * (c.time - now);
            x2 += p.c2 * (c.time - now);
            const double d1 = p.b1 * c.size, d2 = p.b2 * c.size;
            CHECK(d2 / d1 == doctest::Approx(p.b2 / p.b1).epsilon(1e-14));
            x1 -= d1;
            x2 -= d2;
            now = c.time;
        }
        x1 += p.c1 * (T - now);
        x2 += p.c2 * (T - now);
        const SurplusPoint got = uncontrolled_surplus(p, x0, claims, T);
        CHECK(got.x1 == doctest::Approx(x1).epsilon(1e-12));
        CHECK(got.x2 == doctest::Approx(x2).epsilon(1e-12));
    }
}

TEST_CASE("config text") {
    const auto kv = parse_param_text("# comment\nc1 = 2\nc2=4\n\nb1 = 0.25\nb2 = 0.75\nlambda = 1\ngamma = 0.25\nq = 0.05\n");
    const ModelParams p = params_from_map(kv);
    CHECK(p.c2 == 4.0);
    CHECK(p.q == 0.05);
    CHECK_THROWS_AS(parse_param_text("c1 = 2\ncolour = 3\n"), ParamError);
    CHECK_THROWS_AS(parse_param_text("c1 = two\n"), ParamError);
    CHECK_THROWS_AS(parse_param_text("c1 2\n"), ParamError);
    try {
        params_from_map(parse_param_text("c1 = 2\n"));
        FAIL("missing keys accepted");
    } catch (const ParamError& e) {
        CHECK(e.kind() == ParamError::Kind::Config);
    }
    const auto path = std::filesystem::temp_directory_path() / "divbang_params_test.txt";
    {
        std::ofstream os(path);
        os << "c1=1\nc2=1\nb1=0.5\nb2=0.5\nlambda=2\ngamma=1\nq=0.1\n";
    }
    CHECK(params_from_map(read_param_file(path)).lambda == 2.0);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_param_file("/nonexistent/divbang.toml"), ParamError);
}
