#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace emuprob;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(EMUPROB_TEST_DATA) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("emuprob_test_" + name)).string();
}

} // namespace

TEST_CASE("validate and exit codes") {
    auto ok = run({"validate", data("two_state.json")});
    CHECK(ok.code == 0);
    CHECK(ok.out == "ok,states=2,minimized=yes\n");
    auto missing = run({"validate", data("missing_edge.json")});
    CHECK(missing.code == 2);
    CHECK(missing.err.rfind("error,validation,", 0) == 0);
    CHECK(run({"validate", data("nope.json")}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
}

TEST_CASE("stationary output") {
    auto r = run({"stationary", data("two_state.json"), "--set", "all"});
    CHECK(r.code == 0);
    CHECK(r.out == "0,1\n2/3,1/3\n");
    auto dec = run({"stationary", data("two_state.json"), "--decimal"});
    CHECK(dec.out == "0,1\n2/3,1/3\n~0.666666666667,~0.333333333333\n");
    auto power = run({"stationary", data("two_state.json"), "--method", "power"});
    CHECK(power.code == 0);
    CHECK(power.out.find("iterations,") != std::string::npos);
    auto invariant = run({"stationary", data("two_cycle.json")});
    CHECK(invariant.code == 0);
    CHECK(invariant.out.rfind("0,1\n1/2,1/2\nnote,periodic chain", 0) == 0);
    auto periodic = run({"stationary", data("two_cycle.json"), "--method", "power", "--max-iter", "50"});
    CHECK(periodic.code == 1);
    CHECK(periodic.err.rfind("error,domain,", 0) == 0);
    auto redundant = run({"stationary", data("redundant.json")});
    CHECK(redundant.code == 1);
    CHECK(redundant.err.rfind("error,contract,", 0) == 0);
    CHECK(run({"stationary", data("two_state.json"), "--set", "missing"}).code == 1);
}

TEST_CASE("matrix, analyze and n-step") {
    auto m = run({"matrix", data("two_state.json")});
    CHECK(m.out == "state,0,1\n0,1/2,1/2\n1,1/1,0/1\n");
    auto a = run({"analyze", data("two_cycle.json")});
    CHECK(a.code == 0);
    CHECK(a.out.find("period,2\n") != std::string::npos);
    CHECK(a.out.find("class,PeriodicFinite\n") != std::string::npos);
    auto n = run({"nstep", data("two_state.json"), "-n", "2", "--start", "0"});
    CHECK(n.out == "0,1\n3/4,1/4\n");
    CHECK(run({"nstep", data("two_state.json"), "-n", "2", "--method", "tree"}).out == n.out);
    CHECK(run({"nstep", data("two_state.json")}).code == 2);
}

TEST_CASE("minimize subcommand") {
    auto r = run({"minimize", data("redundant.json")});
    CHECK(r.code == 0);
    CHECK(r.out == slurp(data("two_state.json")));
    auto map = run({"minimize", data("redundant.json"), "--map"});
    CHECK(map.out == "state,minimized\n0,0\n1,1\n2,0\n");
}

TEST_CASE("walks are deterministic and seed-strict on request") {
    std::vector<std::string> args{"walk", data("two_state.json"), "--seed", "42", "--len", "6", "--samples", "20"};
    auto a = run(args);
    auto b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--workers", "3"});
    CHECK(run(threaded).out == a.out);
    CHECK(a.out.rfind("seed,bits,states,outputs\n", 0) == 0);
    CHECK(run({"--strict-seed", "walk", data("two_state.json")}).code == 2);
    CHECK(run({"walk", data("two_state.json"), "--strict-seed"}).code == 2);
    auto dist = run({"walk", data("two_state.json"), "--seed", "1", "--len", "6", "--samples", "5000", "--distribution"});
    CHECK(dist.out.find("total_variation,") != std::string::npos);
}

TEST_CASE("probability subcommand") {
    auto st = run({"probability", data("two_state.json"), "--all"});
    CHECK(st.out == "output,probability_num,probability_den\n0,2,3\n1,1,3\nnull,0,1\n");
    auto one = run({"probability", data("two_state.json"), "-n", "1", "--string", "0"});
    CHECK(one.out == "output,probability_num,probability_den\n0,1,2\n");
    CHECK(run({"probability", data("two_state.json"), "--string", "0", "--all"}).code == 2);
    auto weighted = run({"probability", data("two_state.json"), "--weighted", "-n", "1"});
    CHECK(weighted.code == 1);
    CHECK(weighted.err.rfind("error,hypothesis,inapplicable: closure", 0) == 0);
}

TEST_CASE("fixtures, transforms and quotients") {
    auto toggle_path = temp_path("toggle.json");
    auto fx = run({"construct-fixture", "toggle", "--out", toggle_path});
    CHECK(fx.code == 0);
    CHECK(fx.out.empty());
    auto w = run({"probability", toggle_path, "--set", "phi", "--weighted", "-n", "1"});
    CHECK(w.code == 0);
    CHECK(w.out == "output,stationary,weighted_average,equal\n0,1/2,1/2,yes\n1,1/2,1/2,yes\nnull,0/1,0/1,yes\n");
    auto q = run({"quotient", toggle_path, "--k", "1"});
    CHECK(q.code == 0);
    CHECK(q.out == "class,members\n0,0;1\n1,2;3\nstate,0,1\n0,1/2,1/2\n1,1/2,1/2\n0,1\n1/2,1/2\n");

    auto swapped = run({"transform", data("two_state.json"), "--output-perm", data("complement.json")});
    CHECK(swapped.code == 0);
    CHECK(swapped.out.find("{\"id\": 0, \"out\": \"1\", \"t0\": 0, \"t1\": 1}") != std::string::npos);
    auto flipped = run({"transform", data("two_state.json"), "--input-perm", data("flip.json")});
    CHECK(flipped.code == 0);
    CHECK(run({"transform", data("two_state.json")}).code == 2);

    CHECK(run({"construct-fixture", "two-state"}).out.find("\"phi\": [0, 1]") != std::string::npos);
    CHECK(run({"construct-fixture", "figure3"}).code == 0);
    CHECK(run({"construct-fixture", "nonsense"}).code == 2);
    std::filesystem::remove(toggle_path);
}

TEST_CASE("virus and sync subcommands") {
    auto v = run({"virus", "--max", "20", "--samples", "20000", "--seed", "7"});
    CHECK(v.code == 0);
    CHECK(v.out.find("exact,") != std::string::npos);
    CHECK(v.out.find("~0.288788") != std::string::npos);
    CHECK(run({"virus", "--max", "20", "--samples", "20000", "--seed", "7", "--workers", "5"}).out == v.out);
    auto concrete = run({"virus", "--max", "5", "--samples", "100", "--seed", "1", "--concrete"});
    CHECK(concrete.out.find("block,advance\n1,1/2\n2,3/4\n3,7/8\n4,15/16\n") != std::string::npos);
    CHECK(run({"virus", "--max", "1", "--seed", "1"}).code == 1);
    auto s = run({"sync", "--word", "11"});
    CHECK(s.code == 0);
    CHECK(s.out.find("class,PositiveRecurrentFinite\n") != std::string::npos);
    CHECK(s.out.find("bound,1/4\n") != std::string::npos);
}

TEST_CASE("verify subcommand") {
    auto r = run({"verify", "--suite", "markov", "--seed", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(run({"verify", "--suite", "bogus"}).code == 1);
}
