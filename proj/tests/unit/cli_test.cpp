#include <doctest.h>

#include "cosim/cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>
#include <unistd.h>

namespace fs = std::filesystem;
using cosim::cli::run_cli;

namespace {

const fs::path frt_dir = fs::path(COSIM_DATA_DIR) / "frt";

struct invocation {
    int code;
    std::string out;
    std::string err;
};

invocation cosim_cmd(std::vector<std::string> args)
{
    spdlog::set_level(spdlog::level::warn);
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct scratch {
    fs::path dir = fs::temp_directory_path() / ("cosim_cli_" + std::to_string(::getpid()));
    scratch() { fs::create_directories(dir); }
    ~scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

} // namespace

TEST_CASE("validate")
{
    auto r = cosim_cmd({"validate", (frt_dir / "ts_sc.json").string()});
    CHECK(r.code == 0);
    CHECK(r.out.empty());

    r = cosim_cmd({"validate", (fs::path(COSIM_FIXTURE_DIR) / "invalid" / "tc_oui_outside_sut.json").string()});
    CHECK(r.code == 1);
    CHECK(r.out.rfind("ERROR transmission_grid: ", 0) == 0);
}

TEST_CASE("usage errors")
{
    CHECK(cosim_cmd({"frobnicate"}).code == 64);
    CHECK(cosim_cmd({}).code == 64);
    CHECK(cosim_cmd({"validate", "no/such/file.json"}).code == 64);
    CHECK(cosim_cmd({"workflow", "state.json", "sideways"}).code == 64);
    const auto r = cosim_cmd({"run", (frt_dir / "experiment.json").string(), "--plan", (frt_dir / "plan.json").string(),
                              "--set", "no_such_parameter=1"});
    CHECK(r.code == 64);
    CHECK(cosim_cmd({"run", (frt_dir / "experiment.json").string(), "--plan", (frt_dir / "plan.json").string(),
                     "--set", "tol"})
              .code == 64);
    CHECK(cosim_cmd({"--help"}).code == 0);
}

TEST_CASE("compile, run, assess")
{
    scratch tmp;
    auto r = cosim_cmd({"compile", (frt_dir / "test_spec.json").string(), "--ri", (frt_dir / "ri_sc.json").string(),
                        "-o", tmp / "exp.json"});
    REQUIRE(r.code == 0);
    CHECK(cosim_cmd({"validate", tmp / "exp.json"}).code == 0);

    r = cosim_cmd({"run", tmp / "exp.json", "--plan", (frt_dir / "plan.json").string(), "-o", tmp / "a"});
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 4);

    const auto assessed = cosim_cmd({"assess", tmp / "a"});
    CHECK(assessed.code == 0);
    CHECK(assessed.out == r.out);

    SUBCASE("repeated invocation reproduces the outputs")
    {
        cosim_cmd({"run", tmp / "exp.json", "--plan", (frt_dir / "plan.json").string(), "-o", tmp / "b"});
        for (const auto& e : fs::directory_iterator(tmp / "a"))
            CHECK(slurp(e.path()) == slurp(fs::path(tmp / "b") / e.path().filename()));
    }
    SUBCASE("tighter envelope fails")
    {
        const auto tight = cosim_cmd({"assess", tmp / "a", "--set", "U_ret=0.0001", "-o", tmp / "c"});
        CHECK(tight.code == 1);
        CHECK(tight.out.find(",fail") != std::string::npos);
        CHECK(cosim_cmd({"assess", tmp / "a", "--set", "frt.k_q=0"}).code == 64);
    }
    SUBCASE("bad plan")
    {
        std::ofstream(tmp / "plan.json") << R"({"t0": 0.2, "sweep": [{"x": "bus:5", "y": 0.1}]})";
        CHECK(cosim_cmd({"run", tmp / "exp.json", "--plan", tmp / "plan.json", "-o", tmp / "d"}).code == 1);
    }
    SUBCASE("execution error")
    {
        std::ofstream(tmp / "plan.json") << R"({"t0": 0.1, "sweep": [{"x": "bus:77", "y": 0.3}]})";
        const auto bad = cosim_cmd({"run", tmp / "exp.json", "--plan", tmp / "plan.json", "-o", tmp / "d"});
        CHECK(bad.code == 2);
        CHECK(bad.err.find("bus:77") != std::string::npos);
    }
}

TEST_CASE("workflow")
{
    scratch tmp;
    const auto state = tmp / "wf.json";
    for (int i = 0; i < 5; ++i) REQUIRE(cosim_cmd({"workflow", state, "proceed"}).code == 0);
    CHECK(cosim_cmd({"workflow", state}).out.find("current: pre_assessment") != std::string::npos);
    CHECK(cosim_cmd({"workflow", state, "loop_back"}).code == 0);
    CHECK(cosim_cmd({"workflow", state, "loop_back"}).code == 1);
    const auto shown = cosim_cmd({"workflow", state});
    CHECK(shown.out.find("current: test_spec") != std::string::npos);
    CHECK(std::count(shown.out.begin(), shown.out.end(), '\n') == 6 + 1);
}
