#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(SMECH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("smech_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("build writes the operator set") {
    const auto dir = scratch("build");
    REQUIRE(run("build --preset free --out " + dir.string()) == 0);
    for (const char* f : {"base.txt", "lifted.txt", "conjugate.txt", "sector_pi2.txt", "hamiltonian.txt", "summary.json"})
        CHECK_MESSAGE(fs::exists(dir / f), f);
    CHECK(slurp(dir / "summary.json").find("\"c0\"") != std::string::npos);
}

TEST_CASE("verify exit codes") {
    const auto dir = scratch("verify");
    CHECK(run("verify --preset free --no-mc --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "verify.json"));
    CHECK(run("verify --preset free --no-mc --perturb reversed-phase --out " + dir.string()) == 1);
    CHECK(run("verify --preset constant-A --no-mc --perturb central-gradient --out " + dir.string()) == 1);
    CHECK(run("verify --preset free --paths 0 --out " + dir.string()) == 2);
    CHECK(run("verify --preset nonsense --out " + dir.string()) == 2);
    CHECK(run("verify --model /nonexistent.yaml --out " + dir.string()) == 2);
}

TEST_CASE("bad model files are configuration errors") {
    const auto dir = scratch("config");
    std::ofstream(dir / "bad.yaml") << "lattice:\n  dimension: 1\n  sites: 8\n  spacing: 1.0\nbogus_key: 3\n";
    CHECK(run("build --model " + (dir / "bad.yaml").string() + " --out " + dir.string()) == 2);
}

TEST_CASE("mc output is deterministic across thread counts") {
    const auto a = scratch("mc_a");
    const auto b = scratch("mc_b");
    REQUIRE(run("mc --preset free --paths 4000 --seed 7 --threads 1 --out " + a.string()) == 0);
    REQUIRE(run("mc --preset free --paths 4000 --seed 7 --threads 3 --out " + b.string()) == 0);
    CHECK(slurp(a / "kernel.csv") == slurp(b / "kernel.csv"));
    CHECK(slurp(a / "mc.json") == slurp(b / "mc.json"));
    CHECK(slurp(a / "kernel.csv").rfind("# smech-kernel-estimate", 0) == 0);
}

TEST_CASE("converge and density") {
    const auto dir = scratch("converge");
    CHECK(run("converge --preset free --levels 2 --check --out " + dir.string()) == 0);
    CHECK(run("converge --preset constant-A --out " + dir.string()) == 2);
    CHECK(run("density --preset harmonic --condition-site 2 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "density.json"));
    CHECK(fs::exists(dir / "condition.json"));
}
