#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "capsim/config.hpp"
#include "capsim/errors.hpp"
#include "capsim/presets.hpp"

using namespace capsim;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kScenario = R"json({
  "path": {"preset": "straight215"},
  "environment": {"preset": "env2", "R_max": 1.8},
  "controller": {"name": "ac", "params": {"K_P": 2.5, "ac_rate": 500}},
  "run": {"V_c": 0.004, "f_c": 10, "seed": 42, "trials": 3}
})json";

}  // namespace

TEST_CASE("scenario parsing fills the config") {
    const auto sc = cli::parse_scenario(kScenario);
    CHECK(sc.trials == 3);
    CHECK(sc.config.seed == 42);
    CHECK(sc.config.V_c == doctest::Approx(0.004));
    CHECK(sc.config.environment.mmc_mode == env::MmcMode::slow_varying);
    CHECK(sc.config.environment.R_max == doctest::Approx(1.8));
    CHECK(sc.config.controller.type == sim::ControllerType::ac);
    CHECK(sc.config.controller.gains.K_P(0, 0) == doctest::Approx(2.5));
    CHECK(sc.config.controller.ac.rate == doctest::Approx(500));
    CHECK(sc.config.key_points == presets::path_preset("straight215"));
}

TEST_CASE("unknown keys are rejected with context") {
    const char* bad = R"({"path": {"preset": "straight215"}, "controller": {"name": "pd"},
                          "run": {"V_c": 0.003, "turbo": true}})";
    CHECK_THROWS_WITH_AS(cli::parse_scenario(bad, "t"),
                         doctest::Contains("unknown key \"turbo\""), ConfigError);
}

TEST_CASE("malformed json reports line and column") {
    try {
        cli::parse_scenario("{\n  \"path\": {\n", "broken.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("broken.json:") != std::string::npos);
        CHECK(msg.find(":3:") != std::string::npos);  // error on line 3
    }
}

TEST_CASE("scenario validation catches bad values") {
    CHECK_THROWS_AS(cli::parse_scenario(R"({"path": {"preset": "nope"},
                                            "controller": {"name": "pd"}})"),
                    ConfigError);
    CHECK_THROWS_AS(cli::parse_scenario(R"({"path": {"preset": "straight215"},
                                            "controller": {"name": "warp"}})"),
                    ConfigError);
    CHECK_THROWS_AS(cli::parse_scenario(R"({"path": {"preset": "straight215"},
                                            "controller": {"name": "pd"},
                                            "run": {"V_c": -1}})"),
                    ConfigError);
    CHECK_THROWS_AS(cli::parse_scenario(R"({"controller": {"name": "pd"}})"), ConfigError);
    // Both preset and key_points is ambiguous.
    CHECK_THROWS_AS(cli::parse_scenario(R"({"path": {"preset": "straight215",
                                                     "key_points": [[0,0,0],[1,0,0]]},
                                            "controller": {"name": "pd"}})"),
                    ConfigError);
}

TEST_CASE("explicit key points are accepted") {
    const auto sc = cli::parse_scenario(R"({"path": {"key_points": [[0,0,0],[0.1,0,0],[0.2,0.05,0]]},
                                            "controller": {"name": "pd"}})");
    CHECK(sc.config.key_points.size() == 3);
    CHECK(sc.config.key_points[2].y() == doctest::Approx(0.05));
}

TEST_CASE("steps csv schema is stable") {
    std::vector<sim::StepLog> log(2);
    log[1].t = 0.1;
    log[1].phase = 3;
    const fs::path dir = fs::temp_directory_path() / "capsim_csv_test";
    fs::create_directories(dir);
    cli::write_steps_csv(dir / "steps.csv", log);
    const std::string text = slurp(dir / "steps.csv");
    CHECK(text.rfind("t,px,py,pz,vx,vy,vz,hx,hy,hz,pdx,pdy,pdz,fx,fy,fz,d,alpha,beta,phase,R,"
                     "pos_err,ori_err\n", 0) == 0);
    // Header + one line per record.
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    fs::remove_all(dir);
}

TEST_CASE("summary aggregation") {
    cli::TrialSummary a, b;
    a.mean_pos_err_mm = 1.0;
    b.mean_pos_err_mm = 3.0;
    a.mean_speed_mm_s = 2.0;
    b.mean_speed_mm_s = 4.0;
    const auto rep = cli::SummaryReport::aggregate({a, b});
    CHECK(rep.mean_pos_err_mm == doctest::Approx(2.0));
    CHECK(rep.std_pos_err_mm == doctest::Approx(1.0));
    CHECK(rep.mean_speed_mm_s == doctest::Approx(3.0));
}

#ifdef CAPSIM_BIN
TEST_CASE("simulate command is deterministic and writes the expected outputs") {
    const fs::path dir = fs::temp_directory_path() / "capsim_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path scenario = dir / "scenario.json";
    {
        std::ofstream out(scenario);
        out << R"({"path": {"preset": "slope30"},
                   "environment": {"preset": "env4"},
                   "controller": {"name": "ac"},
                   "run": {"V_c": 0.005, "f_c": 10, "seed": 7, "max_duration_s": 10}})";
    }
    auto run = [&](const fs::path& out) {
        const std::string cmd = std::string(CAPSIM_BIN) + " simulate --scenario " +
                                scenario.string() + " --out " + out.string();
        return std::system(cmd.c_str());
    };
    REQUIRE(run(dir / "a") == 0);
    REQUIRE(run(dir / "b") == 0);
    const std::string csv_a = slurp(dir / "a" / "steps.csv");
    CHECK(!csv_a.empty());
    CHECK(csv_a == slurp(dir / "b" / "steps.csv"));
    CHECK(fs::exists(dir / "a" / "summary.json"));

    // Malformed config: exit 1, no outputs.
    {
        std::ofstream out(scenario);
        out << "{not json";
    }
    const int rc = run(dir / "c");
    CHECK(WEXITSTATUS(rc) == 1);
    CHECK(!fs::exists(dir / "c" / "steps.csv"));
    fs::remove_all(dir);
}

TEST_CASE("validate command flags an injected force sign flip") {
    const std::string good = std::string(CAPSIM_BIN) + " validate --filter force-gradient > /dev/null";
    CHECK(WEXITSTATUS(std::system(good.c_str())) == 0);
    const std::string bad = std::string(CAPSIM_BIN) +
                            " validate --filter force-gradient --inject-dipole-force-sign-flip > /dev/null";
    CHECK(WEXITSTATUS(std::system(bad.c_str())) == 1);
}
#endif

TEST_SUITE_END();
