#include "commands.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using olg::cli::run;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("olgsim_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "olgsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string config_path(const std::string& name) { return (fs::path(OLG_CONFIG_DIR) / name).string(); }

}  // namespace

TEST_CASE("preset run writes every output and is deterministic") {
    TempDir a("preset_a"), b("preset_b");
    const auto first = invoke({"preset", "fig2", "--out", a.path.string()});
    const auto second = invoke({"preset", "fig2", "--out", b.path.string()});
    REQUIRE(first.code == 0);
    REQUIRE(second.code == 0);
    for (const char* file : {"trajectory.csv", "summary.json", "verify.json", "regime.json"}) {
        REQUIRE_MESSAGE(fs::exists(a.path / file), file);
        CHECK_MESSAGE(slurp(a.path / file) == slurp(b.path / file), file);
    }
    const auto csv = slurp(a.path / "trajectory.csv");
    CHECK(csv.rfind("t,k,p,R,w,d,q,v,b\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 202);

    const auto verify = load_json(a.path / "verify.json");
    CHECK(verify["replay"]["within_1e-10"] == true);
    const auto regime = load_json(a.path / "regime.json");
    CHECK(regime["classification"]["label"] == "asymptotically_bubbly");
    for (const auto& c : regime["conditions"]) {
        CHECK(c.contains("name"));
        CHECK(c.contains("status"));
        CHECK(c.contains("values"));
    }
}

TEST_CASE("eqset from a config file") {
    TempDir dir("eqset");
    const auto r = invoke({"eqset", "--config", config_path("fig2_pure_bubble.ini"), "--out", dir.path.string(),
                           "--horizon", "100", "--tol", "1e-6"});
    REQUIRE(r.code == 0);
    const auto j = load_json(dir.path / "eqset.json");
    CHECK(j["p_lower"] == 0.0);
    CHECK(j["p_upper"].get<double>() == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(j["T"] == 100);
    CHECK(j.contains("p_lower_width"));
    CHECK(j.contains("p_upper_width"));
    CHECK(fs::exists(dir.path / "trajectory.csv"));
}

TEST_CASE("simulate exit codes follow the path status") {
    TempDir dir("simulate");
    const auto ok = invoke({"--config", config_path("simulate_pure_bubble.ini"), "--out", dir.path.string()});
    CHECK(ok.code == 0);
    CHECK(load_json(dir.path / "summary.json")["status"] == "completed");

    const auto high = write_config(dir.path, "high.ini", "[scenario]\npreset = fig2\n[dividends]\nkind = zero\n"
                                                         "[run]\np0 = 0.3\n");
    CHECK(invoke({"simulate", "--config", high.string(), "--out", dir.path.string()}).code == 3);
    CHECK(load_json(dir.path / "summary.json")["status"] == "fail_high");

    const auto low = write_config(dir.path, "low.ini", "[scenario]\npreset = fig2\n[dividends]\nkind = geometric\n"
                                                       "d0 = 0.05\ngamma = 0.5\n[run]\np0 = 0\n");
    CHECK(invoke({"simulate", "--config", low.string(), "--out", dir.path.string()}).code == 2);
}

TEST_CASE("an invalid x-sequence exits with the construction code") {
    TempDir dir("construct");
    const auto bad = write_config(dir.path, "bad.ini", "[scenario]\npreset = fig1\n[dividends]\nC = 1\n");
    const auto r = invoke({"construct", "--config", bad.string(), "--out", dir.path.string()});
    CHECK(r.code == 4);
    const auto verify = load_json(dir.path / "verify.json");
    CHECK(verify.contains("x_sequence"));
}

TEST_CASE("configuration and usage errors exit with code 1") {
    TempDir dir("errors");
    const auto typo = write_config(dir.path, "typo.ini", "[economy]\nalpah = 0.3\n");
    const auto r = invoke({"simulate", "--config", typo.string(), "--out", dir.path.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("alpah") != std::string::npos);

    CHECK(invoke({"simulate", "--config", (dir.path / "missing.ini").string()}).code == 1);
    CHECK(invoke({"simulate"}).code == 1);
    CHECK(invoke({"preset", "fig9", "--out", dir.path.string()}).code == 1);
    CHECK(invoke({"simulate", "--bogus"}).code == 1);
    CHECK(invoke({"eqset", "--config", config_path("fig2_pure_bubble.ini"), "--tol", "-1", "--out",
                  dir.path.string()})
              .code == 1);

    const auto no_command = write_config(dir.path, "nocmd.ini", "[scenario]\npreset = fig2\n");
    CHECK(invoke({"--config", no_command.string(), "--out", dir.path.string()}).code == 1);
}

TEST_CASE("help exits cleanly") {
    const auto r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("simulate") != std::string::npos);
}
