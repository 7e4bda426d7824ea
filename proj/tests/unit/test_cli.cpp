#include "cli.hpp"

#include "lsq/synth.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("lsq_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Result {
    int code;
    std::string log;
};

Result run_lsq(std::vector<std::string> args) {
    std::ostringstream log;
    const int code = lsq::cli::run(args, log);
    return {code, log.str()};
}

// 30 x 320 synthetic market plus a fast config next to it.
fs::path small_market(const std::string& name) {
    const auto dir = scratch(name);
    lsq::SynthConfig sc;
    sc.n_symbols = 30;
    sc.n_days = 320;
    sc.seed = 11;
    lsq::write_synthetic_market(lsq::generate_synthetic_market(sc), dir / "syn");
    json cfg = {{"bars", "syn/bars.csv"},
                {"fundamentals", "syn/fundamentals.csv"},
                {"output_dir", "out"},
                {"backtest", {{"window", 60}, {"n_long", 5}, {"n_short", 5}, {"rebalance", "monthly"}}}};
    std::ofstream(dir / "run.json") << cfg.dump(2);
    return dir;
}

} // namespace

TEST_CASE("usage errors") {
    CHECK(run_lsq({"--help"}).code == 0);
    CHECK(run_lsq({"backtest", "--help"}).code == 0);
    CHECK(run_lsq({}).code == 2);
    const auto unknown = run_lsq({"backtest", "--config", "x.json", "--bogus"});
    CHECK(unknown.code == 2);
    CHECK(unknown.log.find("--bogus") != std::string::npos);
    CHECK(run_lsq({"frobnicate"}).code == 2);
}

TEST_CASE("ingest") {
    const auto dir = scratch("ingest");
    SUBCASE("missing file names the path") {
        const auto r = run_lsq({"ingest", "--bars", (dir / "absent.csv").string(), "--out", (dir / "o").string()});
        CHECK(r.code == 1);
        CHECK(r.log.find("absent.csv") != std::string::npos);
    }
    SUBCASE("malformed dates are rejected and counted") {
        std::ofstream(dir / "b.csv") << "date,symbol,open,high,low,close,volume\n"
                                        "2020-01-02,A,1,1,1,1,10\n"
                                        "2020-13-45,A,1,1,1,1,10\n"
                                        "02/01/2020,B,1,1,1,1,10\n"
                                        "2020-01-03,A,1,1,1,1,10\n";
        const auto r = run_lsq({"ingest", "--bars", (dir / "b.csv").string(), "--out", (dir / "o").string()});
        REQUIRE(r.code == 0);
        const auto rep = json::parse(slurp(dir / "o" / "ingest_report.json"));
        CHECK(rep["bars"]["malformed_dates"] == 2);
        CHECK(rep["bars"]["rows_accepted"] == 2);
        CHECK(fs::exists(dir / "o" / "bars.csv"));
    }
}

TEST_CASE("backtest, report and compare") {
    const auto dir = small_market("bt");
    const auto cfg = (dir / "run.json").string();

    const auto a = run_lsq({"backtest", "--config", cfg, "--output-dir", (dir / "a").string()});
    REQUIRE_MESSAGE(a.code == 0, a.log);
    const auto b = run_lsq({"backtest", "--config", cfg, "--output-dir", (dir / "b").string()});
    REQUIRE(b.code == 0);
    CHECK(slurp(dir / "a" / "tearsheet.json") == slurp(dir / "b" / "tearsheet.json"));
    CHECK(slurp(dir / "a" / "fills.csv") == slurp(dir / "b" / "fills.csv"));

    const auto manifest = json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest["config"]["backtest"]["rebalance"] == "monthly");

    const auto w = run_lsq({"backtest", "--config", cfg, "--output-dir", (dir / "w").string(), "--rebalance", "weekly"});
    REQUIRE(w.code == 0);
    CHECK(json::parse(slurp(dir / "w" / "manifest.json"))["config"]["backtest"]["rebalance"] == "weekly");

    CHECK(run_lsq({"backtest", "--config", cfg, "--rebalance", "hourly"}).code == 2);
    const auto bad_ens = run_lsq({"backtest", "--config", cfg, "--ensemble", "ensemble9"});
    CHECK(bad_ens.code == 2);
    CHECK(bad_ens.log.find("ensemble1") != std::string::npos);

    const auto rep = run_lsq({"report", "--run", (dir / "a").string()});
    CHECK(rep.code == 0);
    CHECK(slurp(dir / "a" / "report.txt").find("sharpe") != std::string::npos);
    CHECK(run_lsq({"report", "--run", (dir / "nowhere").string()}).code == 1);

    const auto one = run_lsq({"compare", "--config", cfg, "--models", "gaussian_nb", "--out", (dir / "c.csv").string()});
    REQUIRE(one.code == 0);
    std::istringstream table(slurp(dir / "c.csv"));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(table, line)) ++lines;
    CHECK(lines == 2); // header plus one row

    const auto unknown = run_lsq({"compare", "--config", cfg, "--models", "perceptron"});
    CHECK(unknown.code == 2);
    CHECK(unknown.log.find("gaussian_nb") != std::string::npos);
}

TEST_CASE("backtest config errors carry the field path") {
    const auto dir = scratch("cfg");
    std::ofstream(dir / "bad.json") << R"({"backtest": {"n_long": "many"}})";
    const auto r = run_lsq({"backtest", "--config", (dir / "bad.json").string()});
    CHECK(r.code == 2);
    CHECK(r.log.find("backtest.n_long") != std::string::npos);
}

TEST_CASE("backtest runtime error leaves an error manifest") {
    const auto dir = scratch("rt");
    json cfg = {{"bars", "missing_bars.csv"}, {"output_dir", "out"}};
    std::ofstream(dir / "run.json") << cfg.dump();
    const auto r = run_lsq({"backtest", "--config", (dir / "run.json").string()});
    CHECK(r.code == 1);
    REQUIRE(fs::exists(dir / "out" / "manifest.json"));
    const auto m = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(m["error"].get<std::string>().find("missing_bars.csv") != std::string::npos);
}

TEST_CASE("synth, factors and analyze-factor") {
    const auto dir = scratch("data");
    const auto syn = (dir / "syn").string();
    REQUIRE(run_lsq({"synth", "--symbols", "12", "--days", "300", "--seed", "4", "--out", syn}).code == 0);
    CHECK(run_lsq({"synth", "--symbols", "3", "--out", syn}).code != 0);
    const auto bars = (dir / "syn" / "bars.csv").string();
    REQUIRE(run_lsq({"factors", "--bars", bars, "--out", (dir / "f.csv").string()}).code == 0);
    CHECK(slurp(dir / "f.csv").rfind("date,symbol,factor,value", 0) == 0);
    REQUIRE(run_lsq({"analyze-factor", "--bars", bars, "--factor", "rate_of_return", "--out", (dir / "q").string()})
                .code == 0);
    CHECK_FALSE(fs::is_empty(dir / "q"));
    CHECK(run_lsq({"analyze-factor", "--bars", bars, "--factor", "nope"}).code == 2);
}
