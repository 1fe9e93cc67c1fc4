#include "nelson/cli.hpp"
#include "nelson/errors.hpp"

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nelson::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "nelson");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("nelson_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("anomaly at the critical point") {
    const auto dir = scratch("anomaly");
    const auto r = invoke({"anomaly", "--dims", "26", "--intercept", "1", "--m", "1", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("Delta_1 = 0") != std::string::npos);
    CHECK(fs::exists(dir / "anomaly.txt"));
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["command"] == "anomaly");
}

TEST_CASE("anomaly away from the critical point") {
    const auto r = invoke({"anomaly", "--dims", "26", "--intercept", "0", "--m", "1,2", "--out", scratch("anomaly0").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("Delta_1 = -1") != std::string::npos);
}

TEST_CASE("single-mode correlator") {
    const auto r = invoke({"correlate", "--n", "1", "--alpha-prime", "0.5", "--dtau-lag", "1.0", "-M", "100000", "--out",
                           scratch("corr").string()});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(slurp(fs::temp_directory_path() / "nelson_cli_corr" / "report.json"));
    const auto row = report["rows"][0];
    CHECK(std::abs(row["z_score"].get<double>()) < 3.0);
    CHECK(std::abs(row["analytic"].get<double>() - std::exp(-1.0)) < 1e-12);
}

TEST_CASE("zero mode is refused with a clear message") {
    const auto r = invoke({"correlate", "--n", "0", "--out", scratch("zero").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("zero mode") != std::string::npos);
    const auto s = invoke({"simulate", "--n", "0", "--correlate", "--init", "point", "--out", scratch("zero2").string()});
    CHECK(s.code == 1);
}

TEST_CASE("validation and parse errors exit with 1") {
    CHECK(invoke({"spectrum", "--alpha-prime", "-1", "--out", scratch("neg").string()}).code == 1);
    CHECK(invoke({"spectrum", "--no-such-flag"}).code == 1);
    CHECK(invoke({"spectrum", "--config", "/nonexistent/file.cfg"}).code == 1);
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"spectrum", "--help"}).code == 0);
}

TEST_CASE("numerical failures exit with 2") {
    const auto r = invoke({"simulate", "--n", "1", "--d-tau", "1e300", "--steps", "3", "--record-stride", "1", "-M", "4", "--drift-cap", "inf",
                           "--out", scratch("nan").string()});
    CHECK(r.code == 2);
}

TEST_CASE("spectrum output") {
    const auto dir = scratch("spectrum");
    const auto r = invoke({"spectrum", "--dims", "26", "--max-level", "2", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("N=1 degeneracy 24") != std::string::npos);
    CHECK(r.out.find("N=2 degeneracy 324") != std::string::npos);
}

TEST_CASE("runs are byte-identical without timestamps") {
    const auto a = scratch("repro_a");
    const auto b = scratch("repro_b");
    const std::vector<std::string> common = {"simulate", "--n", "2", "--mode-cutoff", "2", "-M", "500", "--steps", "200", "--record-stride", "50",
                                             "--seed", "42", "--no-timestamp", "--out"};
    auto args_a = common;
    args_a.push_back(a.string());
    auto args_b = common;
    args_b.push_back(b.string());
    REQUIRE(invoke(args_a).code == 0);
    REQUIRE(invoke(args_b).code == 0);
    CHECK(slurp(a / "ensemble.txt") == slurp(b / "ensemble.txt"));
    CHECK(slurp(a / "ensemble.txt").find("# timestamp") == std::string::npos);

    const auto c = scratch("repro_c");
    auto args_c = common;
    args_c.pop_back();
    args_c.pop_back();
    args_c.push_back("--out");
    args_c.push_back(c.string());
    REQUIRE(invoke(args_c).code == 0);
    CHECK(slurp(c / "ensemble.txt").find("# timestamp") != std::string::npos);
}

TEST_CASE("output headers round trip") {
    auto cfg = nelson::cli::default_run_config("transport-check");
    nelson::cli::set_run_key(cfg, "alpha_prime", "0.25");
    nelson::cli::set_run_key(cfg, "function", "x2");
    nelson::cli::set_run_key(cfg, "seed", "99");
    const auto header = nelson::cli::format_run_header(cfg, std::string("2026-01-01T00:00:00Z"));
    std::istringstream in(header + "x y\n1 2\n");
    const auto back = nelson::cli::parse_run_header(in);
    CHECK(nelson::cli::format_run_header(back) == nelson::cli::format_run_header(cfg));
    CHECK(back.options.at("function") == "x2");
    CHECK_THROWS_AS(nelson::cli::set_run_key(cfg, "bogus", "1"), nelson::ValidationError);
}

TEST_CASE("config file with flag overrides") {
    const auto dir = scratch("cfg");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "run.cfg");
        f << "dims = 10\nmax_level = 1\n";
    }
    const auto r = invoke({"spectrum", "--config", (dir / "run.cfg").string(), "--max-level", "2", "--out",
                           (dir / "o").string(), "--no-timestamp"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("N=1 degeneracy 8") != std::string::npos);
    CHECK(r.out.find("N=2 degeneracy 44") != std::string::npos);
    const auto text = slurp(dir / "o" / "spectrum.txt");
    CHECK(text.find("# dims = 10") != std::string::npos);
    CHECK(text.find("# max_level = 2") != std::string::npos);
}

TEST_CASE("installed executable") {
    const char* exe = std::getenv("NELSON_CLI");
    if (exe == nullptr) SKIP("NELSON_CLI not set");
    const std::string quiet = " > /dev/null 2>&1";
    CHECK(std::system((std::string(exe) + " --help" + quiet).c_str()) == 0);
    const auto dir = scratch("exe");
    const int status = std::system((std::string(exe) + " anomaly --m 1 --out " + dir.string() + quiet).c_str());
    CHECK(WEXITSTATUS(status) == 0);
    const int bad = std::system((std::string(exe) + " correlate --n 0 --out " + dir.string() + quiet).c_str());
    CHECK(WEXITSTATUS(bad) == 1);
}
