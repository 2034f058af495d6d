#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>

#include "blowup/config.hpp"
#include "blowup/errors.hpp"

using namespace blowup;
namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("blowup_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path write(const std::string& name, const std::string& body) const {
        std::ofstream(dir / name) << body;
        return dir / name;
    }
};

// runs the CLI inside dir; returns the exit status, output in dir/log.txt
int cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
    std::string cmd = "cd '" + dir.string() + "' && " + env + " '" BLOWUP_CLI "' " + args + " > log.txt 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
    return out;
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string s;
    std::getline(in, s);
    return s;
}

const char* kShortSim = "[simulate]\ntau0 = 10\ntau1 = 14\ndR = 0.25\n[output]\ndir = out\n";

}  // namespace

TEST_CASE("nu = 2 with level 1 enabled is a validation error") {
    Scratch s("nu2");
    s.write("bad.ini", "[scaling]\nnu = 2\n");
    CHECK(cli(s.dir, "dump-profiles -c bad.ini") == 2);
    CHECK(slurp(s.dir / "log.txt").find("recursion.levels") != std::string::npos);
    CHECK_FALSE(fs::exists(s.dir / "out"));
    CHECK_THROWS_AS(load_config((s.dir / "bad.ini").string()), ValidationError);
}

TEST_CASE("configuration errors name the key") {
    Scratch s("keys");
    s.write("unknown.ini", "[spectral]\nxi_mni = 1\n");
    CHECK(cli(s.dir, "build-v1 -c unknown.ini") == 2);
    CHECK(slurp(s.dir / "log.txt").find("spectral.xi_mni: unknown key") != std::string::npos);
    s.write("value.ini", "[simulate]\ncfl = fast\n");
    CHECK(cli(s.dir, "build-v1 -c value.ini") == 2);
    CHECK(slurp(s.dir / "log.txt").find("simulate.cfl") != std::string::npos);
    CHECK(cli(s.dir, "all --stage nonsense") == 2);
    CHECK(cli(s.dir, "frobnicate") == 2);
    CHECK(cli(s.dir, "dump-profiles -c missing.ini") == 2);
}

TEST_CASE("environment overrides") {
    Scratch s("env");
    CHECK(cli(s.dir, "dump-profiles", "BLOWUP_SCALING_NU=2") == 2);
    // a custom prefix ignores the default one
    CHECK(cli(s.dir, "dump-profiles --env-prefix RUN_", "BLOWUP_SCALING_NU=2") == 0);
    CHECK(cli(s.dir, "dump-profiles --env-prefix RUN_", "RUN_SCALING_NU=2") == 2);
    CHECK(cli(s.dir, "dump-profiles", "BLOWUP_OUTPUT_DIR=elsewhere") == 0);
    CHECK(fs::exists(s.dir / "elsewhere" / "profiles.csv"));

    setenv("CLITEST_SCALING_EPS0", "0.01", 1);
    setenv("CLITEST_RECURSION_LEVELS", "2,1", 1);
    auto cfg = load_config("", "CLITEST_");
    CHECK(cfg.scaling.eps0 == 0.01);
    CHECK(cfg.recursion.levels == std::vector<int>{2, 1});
    setenv("CLITEST_SIMULATE_RESIDUAL", "maybe", 1);
    CHECK_THROWS_AS(load_config("", "CLITEST_"), ValidationError);
    unsetenv("CLITEST_SCALING_EPS0");
    unsetenv("CLITEST_RECURSION_LEVELS");
    unsetenv("CLITEST_SIMULATE_RESIDUAL");
}

TEST_CASE("stage filter writes only the requested files") {
    Scratch s("stage");
    CHECK(cli(s.dir, "all --stage dump-profiles") == 0);
    CHECK(listing(s.dir / "out") == std::set<std::string>{"profiles.csv", "manifest.json", "timings.json"});
    auto csv = slurp(s.dir / "out" / "profiles.csv");
    CHECK(csv.rfind("R,W,phi1,phi2,phit1,phit2,g1,g2,V\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 402);
}

TEST_CASE("identical configs give identical manifests and files") {
    Scratch a("det_a"), b("det_b"), c("det_c");
    for (const auto* s : {&a, &b, &c}) s->write("run.ini", kShortSim);
    const std::string args = "all -c run.ini --stage dump-profiles,build-v1,spectral";
    CHECK(cli(a.dir, args) == 0);
    CHECK(cli(b.dir, args) == 0);
    CHECK(cli(c.dir, args, "BLOWUP_OUTPUT_THREADS=1") == 0);
    for (const char* f : {"manifest.json", "profiles.csv", "v1.csv", "spec.csv"}) {
        INFO(f);
        auto x = slurp(a.dir / "out" / f);
        CHECK(!x.empty());
        CHECK(x == slurp(b.dir / "out" / f));
    }
    // the thread count changes the config hash but not the data
    for (const char* f : {"profiles.csv", "v1.csv", "spec.csv"}) CHECK(slurp(a.dir / "out" / f) == slurp(c.dir / "out" / f));
    CHECK(slurp(a.dir / "out" / "manifest.json") != slurp(c.dir / "out" / "manifest.json"));
    // wall-clock lives in timings.json only
    CHECK(slurp(a.dir / "out" / "manifest.json").find("seconds") == std::string::npos);
    CHECK(fs::exists(a.dir / "out" / "timings.json"));
}

TEST_CASE("spectral and simulate outputs") {
    Scratch s("outputs");
    s.write("run.ini", kShortSim);
    CHECK(cli(s.dir, "spectral -c run.ini --out spec.csv") == 0);
    CHECK(first_line(s.dir / "out" / "spec.csv") == "xi,rho,a_re,a_im");
    CHECK(cli(s.dir, "spectral -c run.ini --xi-d") == 0);
    CHECK(slurp(s.dir / "log.txt").find("xi_d = -1.21036790") != std::string::npos);

    // over a short window the energy gate may go either way
    int rc = cli(s.dir, "simulate -c run.ini --out traj.csv --svg");
    CHECK((rc == 0 || rc == 4));
    CHECK(first_line(s.dir / "out" / "traj.csv") == "tau,t,energy_in,energy_out,sup_eps,lambda_fit,kappa_eff");
    auto svg = slurp(s.dir / "out" / "traj.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
}
