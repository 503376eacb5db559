#include <doctest.h>

#include "virial_geo/cli.hpp"
#include "virial_geo/errors.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vgeo;
using namespace vgeo::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "virial-geo");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("vgeo_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("run kepler translation Killing relation") {
    const auto dir = scratch("kepler");
    const auto r = invoke({"run", "--system", "kepler", "--fixture", "ellipse", "--relation", "translation-killing",
                        "--output", dir.string()});
    CHECK(r.code == kExitOk);
    const json rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["schema_version"] == kSchemaVersion);
    CHECK(rep["status"] == "ok");
    REQUIRE(rep["relations"].size() == 1);
    const auto& rel = rep["relations"][0];
    CHECK(rel["verdict"] == "pass");
    CHECK(rel["kind"] == "Killing");
    CHECK(rel["classification"] == "Killing");
    CHECK(std::abs(rel["residual"].get<double>()) <= 1e-6);
    CHECK(rel["converged"] == true);
}

TEST_CASE("oscillator homogeneous partition") {
    const auto dir = scratch("osc");
    const auto r = invoke({"run", "--system", "flat-oscillator", "--relation", "homogeneous", "--mu", "2", "--nu", "2",
                        "--output", dir.string()});
    CHECK(r.code == kExitOk);
    const json rep = json::parse(slurp(dir / "report.json"));
    const auto& p = rep["relations"][0]["partition"];
    CHECK(std::abs(p["avg_T"].get<double>() - 0.25) <= 1e-6);
    CHECK(std::abs(p["avg_V"].get<double>() - 0.25) <= 1e-6);
    CHECK(rep["relations"][0]["balance_check"].is_null());
}

TEST_CASE("homogeneous degrees fall back to the dilation entry") {
    const auto sys = build_system(SystemId::kepler());
    const auto rel = resolve_relation(sys, "homogeneous", std::nullopt, std::nullopt);
    CHECK(rel.mu == 2.0);
    CHECK(rel.nu == -1.0);
    CHECK(resolve_relation(sys, "general:rotation", {}, {}).kind == RelationKind::General);
    CHECK(resolve_relation(sys, "translation-killing", {}, {}).kind == RelationKind::Killing);
    CHECK_THROWS_AS(resolve_relation(build_system(SystemId::toda()), "homogeneous", {}, {}), InvalidParameter);
    CHECK_THROWS_AS(resolve_relation(sys, "homogeneous", 1.0, -1.0), DegenerateDegrees);
    CHECK_THROWS_AS(resolve_relation(sys, "warp", {}, {}), InvalidParameter);
}

TEST_CASE("failing relations exit 2 with verdict fail") {
    const auto dir = scratch("fail");
    const auto r = invoke({"run", "--system", "sphere", "--relation", "X1", "--t-end", "5", "--output", dir.string()});
    CHECK(r.code == kExitRelationFailed);
    const json rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["relations"][0]["verdict"] == "fail");
}

TEST_CASE("CSV layout") {
    const auto dir = scratch("csv");
    const auto r = invoke({"run", "--system", "kepler", "--fixture", "circular", "--relation", "rotation", "--relation",
                        "homogeneous", "--t-end", "1", "--stride", "100", "--output", dir.string()});
    CHECK(r.code != kExitError);
    std::istringstream csv(slurp(dir / "timeseries.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,q1,q2,v1,v2,E,G_rotation,A_rotation,A_homogeneous");
    std::vector<std::string> rows;
    for (std::string line; std::getline(csv, line);) rows.push_back(line);
    CHECK(rows.size() == 11);  // 1000 steps, every 100th sample
    CHECK(rows.front().rfind("0,1,0,0,1,-0.5,", 0) == 0);
    CHECK(rows.back().rfind("1,", 0) == 0);
    CHECK(slurp(dir / "timeseries.csv").find('\r') == std::string::npos);
}

TEST_CASE("identical runs are byte-identical") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& d : {a, b})
        CHECK(invoke({"run", "--system", "toda", "--seed", "7", "--t-end", "10", "--output", d.string()}).code !=
              kExitError);
    CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));

    const auto c = scratch("det_c");
    invoke({"run", "--system", "toda", "--seed", "8", "--t-end", "10", "--output", c.string()});
    CHECK(slurp(a / "timeseries.csv") != slurp(c / "timeseries.csv"));
}

TEST_CASE("config file with flag overrides") {
    const auto dir = scratch("config");
    const fs::path cfg = dir / "run.json";
    write(cfg, R"({"system": {"name": "polar", "params": {"potential": "harmonic", "k": 2}},
                  "integrator": {"dt": 0.002, "t_end": 4},
                  "relations": ["rotation"],
                  "output": {"dir": ")" + (dir / "out").string() + R"(", "csv": "ts.csv", "json": "rep.json"},
                  "stride": 5, "seed": 3})");
    const RunConfig rc = load_config(cfg.string());
    CHECK(rc.system == "polar");
    CHECK(rc.params.at("k") == "2");
    CHECK(*rc.dt == 0.002);
    CHECK(rc.stride == 5);
    CHECK(rc.seed == 3);

    const auto r = invoke({"run", "--config", cfg.string(), "--t-end", "2"});
    CHECK(r.code == kExitOk);
    const json rep = json::parse(slurp(dir / "out" / "rep.json"));
    CHECK(rep["integrator"]["t_end"] == 2.0);
    CHECK(rep["integrator"]["steps"] == 1000);
    CHECK(rep["system"]["params"]["potential"] == "harmonic");
    CHECK(fs::exists(dir / "out" / "ts.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / ".rep.json.tmp"));
}

TEST_CASE("config errors exit 1 with a message") {
    const auto dir = scratch("badcfg");
    const auto check_bad = [&](const std::string& text, const std::string& needle) {
        write(dir / "c.json", text);
        CHECK_THROWS_AS(load_config((dir / "c.json").string()), InvalidParameter);
        const auto r = invoke({"run", "--config", (dir / "c.json").string(), "--output", dir.string()});
        CHECK(r.code == kExitError);
        CHECK(r.err.find(needle) != std::string::npos);
    };
    check_bad(R"({"sytem": "kepler"})", "sytem");
    check_bad(R"({"system": "kepler", "integrator": {"dtt": 1}})", "dtt");
    check_bad(R"({"system": "kepler", "integrator": {"method": "leapfrog"}})", "rk4");
    check_bad(R"({"relations": "rotation"})", "relations");
    check_bad(R"({"system": )", "not valid JSON");
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), InvalidParameter);

    CHECK(invoke({"run", "--system", "torus"}).code == kExitError);
    CHECK(invoke({"run", "--system", "kepler", "--relation", "nope"}).code == kExitError);
    CHECK(invoke({"run", "--system", "kepler", "--fixture", "hyperbola"}).code == kExitError);
    CHECK(invoke({"run", "--system", "kepler", "--dt", "-1"}).code == kExitError);
    CHECK(invoke({"run", "--system", "kepler", "--param", "k"}).code == kExitError);
}

TEST_CASE("guard violation writes a partial rejected report") {
    const auto dir = scratch("guard");
    write(dir / "c.json", R"({"system": "kepler", "initial": {"q": [1, 0], "v": [0, 0]},
                              "integrator": {"t_end": 5}, "output": {"dir": ")" +
                              dir.string() + R"("}})");
    const auto r = invoke({"run", "--config", (dir / "c.json").string()});
    CHECK(r.code == kExitError);
    const json rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["status"] == "rejected");
    CHECK(rep["t_violation"].get<double>() > 1.0);
    CHECK(rep["t_violation"].get<double>() < 1.12);
    CHECK(rep["relations"].empty());
}

TEST_CASE("energy-rejected trajectory") {
    const auto dir = scratch("drift");
    const auto r = invoke({"run", "--system", "kepler", "--fixture", "ellipse", "--dt", "0.5", "--t-end", "50",
                        "--output", dir.string()});
    CHECK(r.code == kExitError);
    const json rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["status"] == "rejected");
    CHECK(rep["integrator"]["rejected"] == true);
    CHECK(r.err.find("energy drift") != std::string::npos);
}

TEST_CASE("step cap from the environment") {
    ::setenv(kMaxStepsEnv, "50", 1);
    CHECK(max_steps_from_env(7) == 50);
    const auto dir = scratch("cap");
    const auto r = invoke({"run", "--system", "kepler", "--t-end", "1", "--output", dir.string()});
    CHECK(r.code == kExitError);
    CHECK(r.err.find("step") != std::string::npos);
    ::setenv(kMaxStepsEnv, "abc", 1);
    CHECK_THROWS_AS(max_steps_from_env(7), InvalidParameter);
    ::unsetenv(kMaxStepsEnv);
    CHECK(max_steps_from_env(7) == 7);
}

TEST_CASE("classify subcommand") {
    const auto r = invoke({"classify", "--system", "sphere", "--field", "sinθ∂θ", "--samples", "64"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("ProperConformal") != std::string::npos);

    const auto j = invoke({"classify", "--system", "sphere", "--field", "conformal-sin", "--json"});
    const json c = json::parse(j.out);
    CHECK(c["kind"] == "ProperConformal");
    CHECK(c["samples_used"] == 64);
    for (const auto& s : c["samples"]) {
        const double th = s["q"][0].get<double>();
        CHECK(s["f"].get<double>() == doctest::Approx(2 * std::cos(th)).epsilon(1e-10));
    }

    const auto g = invoke({"classify", "--system", "gnomonic", "--field", "projective-dilation", "--json"});
    CHECK(json::parse(g.out)["kind"] == "NonConformal");
    const auto h = invoke({"classify", "--system", "flat", "--field", "r∂r", "--json"});
    CHECK(json::parse(h.out)["lambda"].get<double>() == doctest::Approx(2.0));

    CHECK(invoke({"classify", "--system", "sphere", "--field", "bogus"}).code == kExitError);
    CHECK(invoke({"classify", "--system", "sphere"}).code == kExitError);
}

TEST_CASE("list-systems") {
    const auto r = invoke({"list-systems"});
    CHECK(r.code == kExitOk);
    for (const char* name : {"sphere", "gnomonic", "kepler", "toda", "radial", "flat"})
        CHECK(r.out.find(std::string("\n") + name + " ") != std::string::npos);

    const auto j = invoke({"list-systems", "--json"});
    const json arr = json::parse(j.out);
    REQUIRE(arr.is_array());
    CHECK(arr.size() == system_names().size());
    CHECK(arr[0]["system"] == "flat");
    CHECK(invoke({"list-systems"}).out == r.out);
}

TEST_CASE("usage errors") {
    const auto r = invoke({"list-systems", "--frobnicate"});
    CHECK(r.code == kExitError);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(invoke({}).code == kExitError);
    CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("number formatting and atomic writes") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(-2.0) == "-2");
    CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(std::stod(format_number(0.1 + 0.2)) == 0.1 + 0.2);

    const auto dir = scratch("atomic");
    write_file_atomic((dir / "sub" / "f.txt").string(), "a\nb\n");
    CHECK(slurp(dir / "sub" / "f.txt") == "a\nb\n");
    write_file_atomic((dir / "sub" / "f.txt").string(), "c\n");
    CHECK(slurp(dir / "sub" / "f.txt") == "c\n");
    CHECK(std::distance(fs::directory_iterator(dir / "sub"), fs::directory_iterator{}) == 1);
}
