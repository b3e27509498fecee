#include "cli.hpp"

#include "doctest.h"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("cbec_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string write_config(const fs::path& dir, const std::string& text)
{
    const auto p = dir / "config.json";
    std::ofstream(p) << text;
    return p.string();
}

Run cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cbec::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli rejects bad configs with code 2")
{
    const auto dir = scratch("schema");
    auto r = cli({"scatter", "--config", write_config(dir, ""), "--output", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("not valid JSON") != std::string::npos);

    r = cli({"scatter", "--config", write_config(dir, "{}"), "--output", (dir / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("missing required key 'command'") != std::string::npos);

    r = cli({"scatter", "--config", write_config(dir, R"({"command": "scatter", "parameters": {"dx": 1}})")});
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown key 'dx'") != std::string::npos);

    r = cli({"scatter", "--config", write_config(dir, R"({"command": "scatter", "parameters": {"dr": "small"}})")});
    CHECK(r.code == 2);
    r = cli({"scatter", "--config", write_config(dir, R"({"command": "scatter", "extra": 1})")});
    CHECK(r.code == 2);
    r = cli({"regimes", "--config", write_config(dir, R"({"command": "scatter"})")});
    CHECK(r.code == 2);
    r = cli({"scatter", "--config", write_config(dir, R"({"command": "scatter", "parameters": {"potential": {"kind": "cube"}}})")});
    CHECK(r.code == 2);
    CHECK(cli({"scatter"}).code == 2);
    CHECK(cli({"scatter", "--bogus"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cli scatter writes results and a manifest")
{
    const auto dir = scratch("scatter");
    const auto cfg = write_config(dir, R"({"command": "scatter", "output_dir": ")" + (dir / "o").string() + R"("})");
    const auto r = cli({"scatter", "--config", cfg});
    REQUIRE(r.code == 0);
    const auto res = json::parse(slurp(dir / "o" / "scatter.json"));
    CHECK(res["result"]["a"].get<double>() == doctest::Approx(1.0 - std::tanh(1.0)).epsilon(1e-6));
    CHECK(res["pass"].get<bool>());
    const auto man = json::parse(slurp(dir / "o" / "manifest.json"));
    CHECK(man["config"]["parameters"]["dr"].get<double>() == 1e-4);
    CHECK(man["config"]["parameters"]["potential"]["kind"] == "soft_sphere");
    CHECK(man["outputs"].size() == 2);
    CHECK(man.contains("wall_time"));
    CHECK(man["versions"].contains("eigen"));
    CHECK(fs::exists(dir / "o" / "j.csv"));
}

TEST_CASE("cli regimes raster at beta = 1 has no free_regime and is deterministic")
{
    const auto dir = scratch("regimes");
    const auto cfg = write_config(dir, R"({"command": "regimes", "parameters": {"beta": 1, "Theta": 3, "Gamma": 1.01}})");
    REQUIRE(cli({"regimes", "--config", cfg, "--output", (dir / "a").string()}).code == 0);
    REQUIRE(cli({"regimes", "--config", cfg, "--output", (dir / "b").string()}).code == 0);
    const auto raster = slurp(dir / "a" / "raster.csv");
    CHECK(raster.find("free_regime") == std::string::npos);
    CHECK(raster == slurp(dir / "b" / "raster.csv"));
    CHECK(slurp(dir / "a" / "regimes.json") == slurp(dir / "b" / "regimes.json"));
}

TEST_CASE("cli counting and transverse runs")
{
    const auto dir = scratch("counting");
    const auto cfg = write_config(dir, R"({"command": "counting", "seed": 5, "parameters": {"N": 4, "lemma_N": 3,
        "lemma_trials": 100, "bound_trials": 10, "samples": 5, "t_final": 0.5}})");
    REQUIRE(cli({"counting", "--config", cfg, "--output", (dir / "a").string()}).code == 0);
    REQUIRE(cli({"counting", "--config", cfg, "--output", (dir / "b").string()}).code == 0);
    const auto lemma = json::parse(slurp(dir / "a" / "lemma_report.json"));
    CHECK(lemma["identities"].size() == 11);
    CHECK(lemma["seed"] == 5);
    CHECK(slurp(dir / "a" / "lemma_report.json") == slurp(dir / "b" / "lemma_report.json"));
    CHECK(slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv"));
    CHECK(slurp(dir / "a" / "series.csv").rfind("t,alpha_less,trace_distance,energy_gap\n", 0) == 0);
    REQUIRE(cli({"counting", "--config", cfg, "--output", (dir / "c").string(), "--seed", "6"}).code == 0);
    CHECK(json::parse(slurp(dir / "c" / "lemma_report.json"))["seed"] == 6);

    const auto tcfg = write_config(dir, R"({"command": "transverse", "parameters": {"dy": 0.01}})");
    REQUIRE(cli({"transverse", "--config", tcfg, "--output", (dir / "t").string()}).code == 0);
    CHECK(json::parse(slurp(dir / "t" / "transverse.json"))["result"]["E0"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));

    const auto ecfg = write_config(dir, R"({"command": "evolve2d", "parameters": {"n": 32, "box": 12, "t_final": 0.1,
        "dt": 0.01, "sample_every": 1, "potential": {"kind": "harmonic"}}})");
    REQUIRE(cli({"evolve2d", "--config", ecfg, "--output", (dir / "e").string()}).code == 0);
    CHECK(fs::exists(dir / "e" / "density.csv"));
}

TEST_CASE("cli verify is reproducible and reports failures")
{
    const auto dir = scratch("verify");
    const auto cfg = write_config(dir, R"({"command": "verify", "parameters": {"only": [4, 10]}})");
    auto r = cli({"verify", "--config", cfg, "--output", (dir / "a").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS   4") != std::string::npos);
    CHECK(r.out.find("PASS  10") != std::string::npos);
    REQUIRE(cli({"verify", "--config", cfg, "--output", (dir / "b").string()}).code == 0);
    CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));
    CHECK(json::parse(slurp(dir / "a" / "summary.json"))["criteria"].size() == 2);

    const auto bad = write_config(dir, R"({"command": "verify", "parameters": {"only": [11]}})");
    CHECK(cli({"verify", "--config", bad, "--output", (dir / "c").string()}).code == 2);
}
