#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef HOPFLAB_CLI_PATH
#error "HOPFLAB_CLI_PATH must point at the hopflab binary"
#endif

const std::string kCli = HOPFLAB_CLI_PATH;

int run(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

fs::path sandbox() {
    const fs::path dir = fs::temp_directory_path() / "hopflab_cli_test";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("zero-drift conditions: CSV of zeros, exit 0") {
    const fs::path dir = sandbox();
    write_file(dir / "zero.json", R"({
        "command": "conditions",
        "domain": {"kind": "elliptic", "n": 2, "R": 1.0},
        "drift": {"family": "zero"},
        "r_grid": [0.25, 0.125]
    })");
    CHECK(run("conditions --config " + (dir / "zero.json").string() + " --out " +
              (dir / "zero_out").string()) == 0);
    const std::string csv = read_file(dir / "zero_out" / "conditions.csv");
    CHECK(csv.find("# config_hash=") == 0);
    CHECK(csv.find("0.000000000000e+00,0.000000000000e+00") != std::string::npos);
}

TEST_CASE("non-Dini modulus requiring J_sigma: exit 2, message names the modulus") {
    const fs::path dir = sandbox();
    write_file(dir / "nondini.json", R"({"modulus": {"family": "logpower", "beta": 0.5}})");
    CHECK(run("modulus --config " + (dir / "nondini.json").string() + " --out " +
              (dir / "nd_out").string()) == 2);
}

TEST_CASE("malformed JSON: exit 1; unknown command: exit 1") {
    const fs::path dir = sandbox();
    write_file(dir / "broken.json", "{\"broken");
    CHECK(run("modulus --config " + (dir / "broken.json").string()) == 1);
    CHECK(run("no-such-command --config " + (dir / "broken.json").string()) == 1);
    CHECK(run("") == 1);
}

TEST_CASE("validation failure names the violated invariant: exit 2") {
    const fs::path dir = sandbox();
    write_file(dir / "badrho.json", R"({
        "rho_grid": [0.9],
        "mesh": {"nr": 8, "ntheta": 12}
    })");
    CHECK(run("hopf-scan --config " + (dir / "badrho.json").string() + " --out " +
              (dir / "br_out").string()) == 2);
}

TEST_CASE("jobs 1 and jobs 8 produce byte-identical CSV bodies") {
    const fs::path dir = sandbox();
    write_file(dir / "scan.json", R"({
        "command": "hopf-scan",
        "rho_grid": [0.25, 0.125],
        "mesh": {"nr": 24, "ntheta": 32},
        "family": {"label": "dini", "eps": 0.45,
                   "a_sigma": {"family": "power", "alpha": 0.5}, "h_sign": 1,
                   "drift": {"family": "near_boundary", "C": 0.5,
                              "sigma": {"family": "power", "alpha": 0.5}}}
    })");
    CHECK(run("hopf-scan --config " + (dir / "scan.json").string() + " --out " +
              (dir / "j1").string() + " --jobs 1") == 0);
    CHECK(run("hopf-scan --config " + (dir / "scan.json").string() + " --out " +
              (dir / "j8").string() + " --jobs 8") == 0);
    CHECK(read_file(dir / "j1" / "hopf_scan.csv") == read_file(dir / "j8" / "hopf_scan.csv"));

    // idempotence: rerunning reproduces the same bytes
    CHECK(run("hopf-scan --config " + (dir / "scan.json").string() + " --out " +
              (dir / "j1b").string() + " --jobs 1") == 0);
    CHECK(read_file(dir / "j1" / "hopf_scan.csv") == read_file(dir / "j1b" / "hopf_scan.csv"));
}

TEST_CASE("solve command dumps the mesh solution") {
    const fs::path dir = sandbox();
    write_file(dir / "solve.json", R"({
        "command": "solve",
        "domain": {"kind": "elliptic", "n": 2, "R": 1.0},
        "rho": 0.5,
        "mesh": {"nr": 16, "ntheta": 24}
    })");
    CHECK(run("solve --config " + (dir / "solve.json").string() + " --out " +
              (dir / "solve_out").string()) == 0);
    const std::string csv = read_file(dir / "solve_out" / "solution.csv");
    CHECK(csv.find("r,theta,value") != std::string::npos);
    const std::string summary = read_file(dir / "solve_out" / "summary.json");
    CHECK(summary.find("config_hash") != std::string::npos);
    CHECK(summary.find("dn_origin") != std::string::npos);
}

TEST_CASE("parabolic-scan command produces the scan CSV") {
    const fs::path dir = sandbox();
    write_file(dir / "pscan.json", R"({
        "command": "parabolic-scan",
        "rho_grid": [0.25, 0.125],
        "mesh": {"nr": 16, "ntheta": 24, "nt": 16}
    })");
    CHECK(run("parabolic-scan --config " + (dir / "pscan.json").string() + " --out " +
              (dir / "ps_out").string()) == 0);
    const std::string csv = read_file(dir / "ps_out" / "parabolic_scan.csv");
    CHECK(csv.find("rho,dnv0,c,psi_term,z_minus_psi,v_minus_z,status") != std::string::npos);
    CHECK(csv.find(",ok") != std::string::npos);
}

TEST_CASE("conditions on a parabolic domain with zero drift") {
    const fs::path dir = sandbox();
    write_file(dir / "pzero.json", R"({
        "domain": {"kind": "parabolic", "n": 2, "R": 1.0},
        "drift": {"family": "zero"},
        "gamma": 1.0,
        "r_grid": [0.25]
    })");
    CHECK(run("conditions --config " + (dir / "pzero.json").string() + " --out " +
              (dir / "pz_out").string()) == 0);
}

TEST_CASE("t1-norm mesh above the 64x96 memory cap is rejected: exit 2") {
    const fs::path dir = sandbox();
    write_file(dir / "t1big.json", R"({
        "drift": {"family": "constant", "vector": [0.0, -1.0, 0.0]},
        "rho_grid": [0.25],
        "mesh": {"nr": 96, "ntheta": 128}
    })");
    CHECK(run("t1-norm --config " + (dir / "t1big.json").string() + " --out " +
              (dir / "t1_out").string()) == 2);
}
