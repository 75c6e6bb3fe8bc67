// Drives the built hysteresis executable end to end.

#include "hysteresis/io.hpp"

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using hysteresis::parse_loop_csv;
using hysteresis::read_file;

namespace {

const fs::path kCli = HYSTERESIS_CLI_PATH;
const fs::path kSamples = HYSTERESIS_SAMPLES_DIR;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hysteresis_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" + kCli.string() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::pair<double, double> column_range(const std::string& csv, std::size_t column) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    double lo = INFINITY, hi = -INFINITY;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string cell;
        for (std::size_t c = 0; c <= column; ++c) std::getline(row, cell, ',');
        const double v = std::stod(cell);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

}  // namespace

TEST_CASE("list-presets prints the catalog", "[cli]") {
    const fs::path dir = scratch("list");
    REQUIRE(run("list-presets", dir / "log") == 0);
    const std::string out = read_file(dir / "log");
    for (const char* name : {"cubic", "budworm", "duhem2d", "sonode35", "folode_rational_shift"}) {
        CHECK(out.find(name) != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("simulate writes trajectory and IO curve", "[cli]") {
    const fs::path dir = scratch("simulate");
    REQUIRE(run("simulate --preset folode_a0_u --omega 0.05 -o \"" + dir.string() + "\"", dir / "log") == 0);
    const std::string traj = read_file(dir / "trajectory.csv");
    CHECK(traj.rfind("t,u,du,x1\n", 0) == 0);
    const auto [lo, hi] = column_range(traj, 3);
    CHECK(lo == Catch::Approx(-1.0).margin(1e-9));
    CHECK(hi == Catch::Approx(39.0).margin(1e-6));
    CHECK(read_file(dir / "io_curve.csv").rfind("u,x\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("bifurcations of the budworm model", "[cli]") {
    const fs::path dir = scratch("bif");
    REQUIRE(run("bifurcations --preset budworm -o \"" + dir.string() + "\"", dir / "log") == 0);
    const std::string csv = read_file(dir / "bifurcations.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "U,x,residual_f,residual_fx");
    std::vector<double> us;
    while (std::getline(in, line)) us.push_back(std::stod(line.substr(0, line.find(','))));
    REQUIRE(us.size() == 3);
    CHECK(us[0] == Catch::Approx(0.0).margin(1e-6));
    CHECK(us[1] == Catch::Approx(0.1589759579).margin(1e-6));
    CHECK(us[2] == Catch::Approx(0.5213066729).margin(1e-6));
    fs::remove_all(dir);
}

TEST_CASE("equilibria and diagram commands", "[cli]") {
    const fs::path dir = scratch("eq");
    REQUIRE(run("equilibria --preset cubic --U 0 -o \"" + dir.string() + "\"", dir / "log") == 0);
    const std::string csv = read_file(dir / "equilibria.csv");
    CHECK(csv.find(",stable,") != std::string::npos);
    CHECK(csv.find(",unstable,") != std::string::npos);
    CHECK(read_file(dir / "log").find("3 equilibria") != std::string::npos);
    REQUIRE(run("diagram --preset cubic --set diagram_n=60 -o \"" + dir.string() + "\"", dir / "log") == 0);
    CHECK(read_file(dir / "diagram.csv").rfind("U,x,stability\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("hysteresis report for the cubic model", "[cli]") {
    const fs::path dir = scratch("hys");
    REQUIRE(run("hysteresis --preset cubic -o \"" + dir.string() + "\"", dir / "log") == 0);
    const auto report = nlohmann::json::parse(read_file(dir / "report.json"));
    CHECK(report["verdict"]["verdict"] == "hysteretic");
    CHECK(report["model"]["name"] == "cubic");
    REQUIRE(report["sweep"].size() == 4);
    const auto& values = report["bifurcations"]["values"];
    REQUIRE(values.size() == 2);
    CHECK(values[1].get<double>() == Catch::Approx(0.3849001797).margin(1e-6));
    const auto& lowest = report["sweep"][3];
    REQUIRE(lowest["loop"]["jumps"].size() == 2);
    for (const auto& j : lowest["loop"]["jumps"]) {
        CHECK(std::fabs(std::fabs(j["u_at_jump"].get<double>()) - 0.3849) < 0.2);
    }
    CHECK(fs::exists(dir / "loop_w3.svg"));
    CHECK(read_file(dir / "loop_w3.svg").find("<svg") != std::string::npos);

    // the loop CSV re-ingests to the same metrics
    const fs::path loop = dir / "loop_w3.csv";
    CHECK(parse_loop_csv(read_file(loop)).size() == 4096);
    REQUIRE(run("analyze-loop \"" + loop.string() + "\" -o \"" + (dir / "an").string() + "\"", dir / "log") == 0);
    const auto again = nlohmann::json::parse(read_file(dir / "an" / "loop_report.json"));
    CHECK(again["geometric_area"].get<double>() == lowest["loop"]["geometric_area"].get<double>());
    CHECK(again["jumps"].size() == 2);
    fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical output", "[cli][property]") {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    const std::string cfg = "-c \"" + (kSamples / "custom_rhs.cfg").string() + "\"";
    REQUIRE(run("hysteresis " + cfg + " --set workers=3 -o \"" + a.string() + "\"", a / "log") == 0);
    REQUIRE(run("hysteresis " + cfg + " --set workers=1 -o \"" + b.string() + "\"", b / "log") == 0);
    for (const char* f : {"report.json", "loop_w0.csv", "loop_w1.csv", "loop_w2.csv", "loop_w2.svg"}) {
        INFO(f);
        CHECK(read_file(a / f) == read_file(b / f));
    }
    REQUIRE(run("simulate --preset sonode35 --set periods=2 -o \"" + a.string() + "\"", a / "log") == 0);
    REQUIRE(run("simulate --preset sonode35 --set periods=2 -o \"" + b.string() + "\"", b / "log") == 0);
    CHECK(read_file(a / "trajectory.csv") == read_file(b / "trajectory.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("every sample config runs", "[cli]") {
    for (const auto& entry : fs::directory_iterator(kSamples)) {
        if (entry.path().extension() != ".cfg") continue;
        const fs::path dir = scratch("sample_" + entry.path().stem().string());
        INFO(entry.path());
        CHECK(run("hysteresis -c \"" + entry.path().string() + "\" -o \"" + dir.string() + "\"", dir / "log") == 0);
        CHECK(fs::exists(dir / "report.json"));
        fs::remove_all(dir);
    }
}

TEST_CASE("exit codes", "[cli]") {
    const fs::path dir = scratch("exit");
    const std::string out = " -o \"" + dir.string() + "\"";
    CHECK(run("", dir / "log") == 1);
    CHECK(run("frobnicate", dir / "log") == 1);
    CHECK(run("hysteresis --preset cubic --set omgea=1" + out, dir / "log") == 1);
    CHECK(read_file(dir / "log").find("omgea") != std::string::npos);
    CHECK(run("hysteresis --preset nope" + out, dir / "log") == 1);
    CHECK(run("simulate --set rhs=x+ " + out, dir / "log") == 1);
    CHECK(run("equilibria --preset folode_t" + out, dir / "log") == 1);
    CHECK(run("hysteresis --set rhs=x^2 --set init=1 --set omegas=1,0.5,0.2" + out, dir / "log") == 2);
    CHECK(run("hysteresis --set rhs=1/u --set omegas=1,0.5,0.2" + out, dir / "log") == 2);
    CHECK(run("simulate --preset cubic -c \"" + (dir / "missing.cfg").string() + "\"" + out, dir / "log") == 3);
    CHECK(run("simulate --preset cubic -o /proc/hysteresis_cannot_write", dir / "log") == 3);
    fs::remove_all(dir);
}
