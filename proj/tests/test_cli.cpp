#include <doctest.h>

#include "cli.hpp"

#include "lionmdp/config.hpp"
#include "lionmdp/lion_model.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lionmdp;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// fresh output directory, exported through the environment
struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("lionmdp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
        ::setenv(cli::kOutputDirEnv, path.c_str(), 1);
    }
    ~TempDir() {
        ::unsetenv(cli::kOutputDirEnv);
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

json load(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    return json::parse(in);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string action_of(const json& report, const std::string& state) {
    for (const auto& e : report.at("states"))
        if (e.at("state") == state) return e.at("action");
    return "";
}

std::size_t data_rows(const std::string& csv) {
    std::size_t n = 0;
    for (char c : csv) n += c == '\n';
    return n - 1;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("solve writes a report with one entry per state") {
    TempDir dir;
    auto r = run({"solve"});
    REQUIRE(r.code == 0);
    auto j = load(dir / "solve.json");
    CHECK(j["states"].size() == 13);
    CHECK(j["solver"]["converged"] == true);
    for (const auto& e : j["states"]) {
        auto s = LionState::parse(e["state"].get<std::string>());
        CHECK(admissible(s, action_from_string(e["action"].get<std::string>())));
    }
    CHECK(fs::exists(dir / "solve.manifest.json"));
    CHECK(r.out.find("P  SF") != std::string::npos);
}

TEST_CASE("myopic solve freezes in place at P") {
    TempDir dir;
    REQUIRE(run({"solve", "--gamma", "0"}).code == 0);
    CHECK(action_of(load(dir / "solve.json"), "P") == "SF");
}

TEST_CASE("invalid parameters exit 1 and name every violation") {
    TempDir dir;
    auto r = run({"solve", "--C_s", "-1", "--alpha", "2"});
    CHECK(r.code == 1);
    CHECK(r.err.find("C_s") != std::string::npos);
    CHECK(r.err.find("alpha") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "solve.json"));

    auto bad_number = run({"solve", "--K", "ten"});
    CHECK(bad_number.code == 1);
}

TEST_CASE("iteration cap exits 2") {
    TempDir dir;
    auto r = run({"solve", "--max-iter", "2"});
    CHECK(r.code == 2);
    CHECK(load(dir / "solve.json")["solver"]["converged"] == false);
}

TEST_CASE("sweeps write one row per grid point") {
    TempDir dir;
    REQUIRE(run({"sweep", "--kind", "alpha", "--grid", "0.1:0.9:0.1", "--out", dir / "a.csv", "--json", dir / "a.json"})
                .code == 0);
    CHECK(data_rows(slurp(dir / "a.csv")) == 9);
    CHECK(load(dir / "a.json").size() == 9);
    CHECK(fs::exists(dir / "a.manifest.json"));

    REQUIRE(run({"sweep", "--kind", "m", "--out", dir / "m.csv"}).code == 0);
    CHECK(data_rows(slurp(dir / "m.csv")) == 10);

    REQUIRE(run({"sweep", "--kind", "antidiag", "--out", dir / "x.csv"}).code == 0);
    auto csv = slurp(dir / "x.csv");
    CHECK(csv.rfind("alpha,beta,", 0) == 0);
    CHECK(data_rows(csv) == 9);
}

TEST_CASE("unknown sweep kind is a usage error") {
    TempDir dir;
    auto r = run({"sweep", "--kind", "gamma"});
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"sweep"}).code == 1);
    CHECK(run({"bogus"}).code == 1);
}

TEST_CASE("simulation is deterministic for a fixed seed") {
    TempDir dir;
    std::vector<std::string> base{"simulate", "--replications", "50", "--horizon", "60", "--seed", "9", "--compare"};
    auto a = base, b = base;
    a.insert(a.end(), {"--summary", dir / "a.json", "--trace", dir / "a.csv"});
    b.insert(b.end(), {"--summary", dir / "b.json", "--trace", dir / "b.csv"});
    REQUIRE(run(a).code == 0);
    REQUIRE(run(b).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    auto ja = load(dir / "a.json"), jb = load(dir / "b.json");
    ja.erase("config");
    jb.erase("config");
    CHECK(ja == jb);
}

TEST_CASE("one-slot myopic simulation returns a single reward") {
    TempDir dir;
    REQUIRE(run({"simulate", "--policy", "always-stay", "--horizon", "1", "--gamma", "0", "--replications", "1",
                 "--trace", dir / "t.csv"})
                .code == 0);
    auto trace = slurp(dir / "t.csv");
    CHECK(data_rows(trace) == 1);
    auto j = load(dir / "simulate.json");
    auto dumped = j.dump();
    LionParams p;
    p.gamma = 0;
    double possible[] = {p.G - p.C_s, -p.C_s, -p.C_s - p.C_L, -p.C_s - p.C_H};
    bool found = false;
    for (double v : possible)
        if (dumped.find("\"mean_return\":" + json(v).dump()) != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("policy files round-trip and bad ones are rejected") {
    TempDir dir;
    REQUIRE(run({"solve", "--out", dir / "pol.json"}).code == 0);
    REQUIRE(run({"simulate", "--policy-file", dir / "pol.json", "--replications", "20", "--horizon", "30",
                 "--summary", dir / "f.json"})
                .code == 0);
    REQUIRE(run({"simulate", "--policy", "optimal", "--replications", "20", "--horizon", "30", "--summary",
                 dir / "o.json"})
                .code == 0);
    auto f = load(dir / "f.json").dump(), o = load(dir / "o.json").dump();
    auto mean = [](const std::string& s) { return s.substr(s.find("\"mean_return\""), 40); };
    CHECK(mean(f) == mean(o));

    CHECK(run({"simulate", "--policy-file", dir / "missing.json"}).code == 1);
    std::ofstream(dir / "garbage.json") << "{ not json";
    CHECK(run({"simulate", "--policy-file", dir / "garbage.json"}).code == 1);
    std::ofstream(dir / "wrong.json") << R"({"states":[{"state":"P","action":"ST"}]})";
    CHECK(run({"simulate", "--policy-file", dir / "wrong.json"}).code == 1);
    CHECK(run({"simulate", "--policy", "clever"}).code == 1);
}

TEST_CASE("validate rejects an invalid discount") {
    TempDir dir;
    auto r = run({"validate", "--gamma", "1.0"});
    CHECK(r.code == 1);
    CHECK(r.err.find("gamma") != std::string::npos);
}

TEST_CASE("validate flags an injected kernel fault") {
    TempDir dir;
    auto clean = run({"validate", "--quick"});
    CHECK(clean.code == 0);
    CHECK(clean.out.find("[PASS] 4.") != std::string::npos);

    auto faulty = run({"validate", "--quick", "--inject-kernel-fault", "0.05"});
    CHECK(faulty.code == 1);
    CHECK(faulty.out.find("[FAIL] 4.") != std::string::npos);
}

TEST_CASE("config file, flag precedence and manifest echo") {
    TempDir dir;
    std::ofstream(dir / "s.cfg") << "alpha = 0.3\nbeta = 0.4 # comment\nK = 6\n";
    REQUIRE(run({"solve", "--config", dir / "s.cfg", "--alpha", "0.7", "--out", dir / "r.json"}).code == 0);
    auto manifest = load(dir / "r.manifest.json");
    CHECK(manifest["subcommand"] == "solve");
    CHECK(manifest["tool_version"] == cli::kVersion);
    CHECK(manifest["params"]["alpha"] == 0.7);
    CHECK(manifest["params"]["beta"] == 0.4);
    CHECK(manifest["params"]["K"] == 6);

    // the echoed parameters alone reproduce the run
    LionParams p;
    KeyValues kv;
    for (auto& [k, v] : manifest["params"].items()) kv[k] = v.dump();
    apply_key_values(p, kv);
    std::ofstream(dir / "echo.cfg") << to_key_values(p);
    REQUIRE(run({"solve", "--config", dir / "echo.cfg", "--out", dir / "r2.json"}).code == 0);
    CHECK(load(dir / "r.json")["states"] == load(dir / "r2.json")["states"]);
}

TEST_CASE("help and version exit cleanly") {
    CHECK(run({"--help"}).code == 0);
    auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(cli::kVersion) != std::string::npos);
}

}
