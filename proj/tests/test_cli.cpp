#include "doctest.h"

#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

using divbang::cli::run_cli;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
}

std::string data_rows(const std::string& s) {
    std::string rows;
    for (const std::string& l : lines(s))
        if (l.rfind("#", 0) != 0) rows += l + "\n";
    return rows;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

} // namespace

TEST_CASE("sha256") {
    CHECK(divbang::cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(divbang::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("exit codes") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--version"}).code == 0);
    CHECK(run({"no-such-command"}).code == 2);
    CHECK(run({"bounds", "--x1", "1"}).code == 2);
    CHECK(run({"bounds", "--x1", "-1", "--x2", "-1"}).code == 2);
    CHECK(run({"bounds", "--x1", "1", "--x2", "1", "--config", "/nonexistent.toml"}).code == 2);
    CHECK(run({"bounds", "--x1", "1", "--x2", "1", "--c1", "0.5"}).code == 2);
    CHECK(run({"solve-barrier", "--branch", "3"}).code == 2);
    CHECK(run({"estimate", "--strategy", "bang9:1", "--x1", "1", "--x2", "1"}).code == 2);
    CHECK(run({"estimate", "--strategy", "transform(greedy)", "--x1", "1", "--x2", "4"}).code == 2);
    CHECK(run({"estimate", "--strategy", "greedy", "--x1", "1", "--x2", "1", "--paths", "1"}).code == 2);
    CHECK(run({"grid", "--step", "0"}).code == 2);
}

TEST_CASE("solve-barrier and bounds") {
    const Result r = run({"solve-barrier", "--branch", "1", "--lambda-div", "0"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 3);
    CHECK(l[0].rfind("# manifest ", 0) == 0);
    CHECK(l[0].size() == std::string("# manifest ").size() + 64);
    CHECK(l[1] == "branch,lambda_div,x_star,R1,R2,residual,iterations");
    CHECK(l[2].rfind("1,0,7.0046", 0) == 0);

    const Result b = run({"bounds", "--x1", "0", "--x2", "0"});
    REQUIRE(b.code == 0);
    CHECK(lines(b.out)[1] == "x1,x2,lower,upper");
    CHECK(lines(b.out)[2].rfind("0,0,5.714285714285714,120", 0) == 0);
}

TEST_CASE("estimate") {
    const Result none = run({"estimate", "--strategy", "none", "--x1", "3", "--x2", "2", "--paths", "50", "--seed", "4"});
    REQUIRE(none.code == 0);
    // censored fraction is large: without dividends the surplus drifts away
    CHECK(lines(none.out)[2].rfind("none,3,2,50,0,0,0,0,", 0) == 0);

    const std::vector<std::string> args{"estimate", "--strategy", "bang1:8", "--x1", "10", "--x2", "10",
                                        "--paths", "300", "--seed", "9"};
    const Result a = run(args);
    const Result b = run(args);
    CHECK(a.out == b.out);
    auto with_threads = args;
    with_threads.insert(with_threads.end(), {"--threads", "3"});
    CHECK(run(with_threads).out == a.out);
    auto other_seed = args;
    other_seed.back() = "10";
    const Result c = run(other_seed);
    CHECK(data_rows(c.out) != data_rows(a.out));
    CHECK(lines(c.out)[0] != lines(a.out)[0]);
}

TEST_CASE("seed from the environment") {
    const std::vector<std::string> args{"estimate", "--strategy", "greedy", "--x1", "2", "--x2", "2", "--paths", "100"};
    ::setenv("DIVBANG_SEED", "77", 1);
    const Result env = run(args);
    ::unsetenv("DIVBANG_SEED");
    auto explicit_seed = args;
    explicit_seed.insert(explicit_seed.end(), {"--seed", "77"});
    const Result flag = run(explicit_seed);
    CHECK(data_rows(env.out) == data_rows(flag.out));
    CHECK(lines(env.out)[2].substr(lines(env.out)[2].rfind(',')) == ",77");
    ::setenv("DIVBANG_SEED", "abc", 1);
    CHECK(run(args).code == 2);
    ::unsetenv("DIVBANG_SEED");
    CHECK(lines(run(args).out)[2].substr(lines(run(args).out)[2].rfind(',')) == ",1");
}

TEST_CASE("output file and manifest") {
    const auto path = temp_file("divbang_cli_bounds.csv");
    const Result r = run({"bounds", "--x1", "10", "--x2", "-4", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    const auto l = lines(ss.str());
    REQUIRE(l.size() == 3);
    std::ifstream ms(path.string() + ".manifest.json");
    REQUIRE(ms.good());
    const nlohmann::json m = nlohmann::json::parse(ms);
    CHECK(m.at("command") == "bounds");
    CHECK(m.at("artifact_version") == divbang::cli::kVersion);
    CHECK(l[0] == "# manifest " + m.at("manifest_hash").get<std::string>());
    CHECK(m.at("params").at("c2") == 4.0);
    CHECK(m.at("output_paths")[0] == path.string());
    CHECK(m.at("wall_clock_seconds").get<double>() >= 0.0);
    CHECK(m.at("flags").contains("--x1"));
    CHECK_FALSE(m.at("flags").contains("--out"));
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".manifest.json");
}

TEST_CASE("config file") {
    const auto path = temp_file("divbang_cli_params.toml");
    {
        std::ofstream os(path);
        os << "c1 = 2\nc2 = 2\nb1 = 0.5\nb2 = 0.5\nlambda = 1\ngamma = 0.25\nq = 0.05\n";
    }
    const Result r = run({"bounds", "--x1", "0", "--x2", "0", "--config", path.string()});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out)[2] == "0,0,3.8095238095238093,80");
    const Result o = run({"bounds", "--x1", "0", "--x2", "0", "--config", path.string(), "--c2", "1"});
    CHECK(lines(o.out)[2] == "0,0,2.857142857142857,60");
    std::ofstream(path) << "c1 = 2\nspeed = 3\n";
    CHECK(run({"bounds", "--x1", "0", "--x2", "0", "--config", path.string()}).code == 2);
    std::filesystem::remove(path);
}

TEST_CASE("grid, sweep, hjb-check and simulate") {
    const auto grid = temp_file("divbang_cli_grid.csv");
    const Result g = run({"grid", "--x1-min", "0", "--x1-max", "4", "--x2-min", "0", "--x2-max", "4", "--step", "1",
                          "--paths", "50", "--seed", "2", "--out", grid.string()});
    REQUIRE(g.code == 0);
    const Result h = run({"hjb-check", "--grid", grid.string(), "--column", "v1"});
    REQUIRE(h.code == 0);
    CHECK(lines(h.out)[1] == "x1,x2,term_a,term_b,term_c,residual");
    CHECK(lines(h.out).size() == 2 + 9 + 1);
    CHECK(lines(h.out).back().rfind("# summary max_violation=", 0) == 0);
    std::ofstream(grid, std::ios::app) << "9,9,1,1,1,1\n";
    CHECK(run({"hjb-check", "--grid", grid.string()}).code == 1);
    std::filesystem::remove(grid);
    std::filesystem::remove(grid.string() + ".manifest.json");

    const Result s = run({"sweep", "--branch", "2", "--min", "10", "--max", "12", "--step", "1", "--paths", "40"});
    REQUIRE(s.code == 0);
    CHECK(lines(s.out).size() == 5);
    CHECK(lines(s.out)[2].rfind("2,10,", 0) == 0);

    const Result t = run({"simulate", "--strategy", "bang1:8", "--x1", "25", "--x2", "25", "--seed", "3"});
    REQUIRE(t.code == 0);
    CHECK(lines(t.out)[1] == "t,event,branch,x1,x2,l1,l2");
    CHECK(lines(t.out)[2].rfind("0,start,", 0) == 0);
}
