// Integration tests for the command line tool: exit-code contract and the
// wiring of each subcommand.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const auto out_file = fs::temp_directory_path() / "pqrlab_cli_out.txt";
    const std::string cmd =
        std::string(PQRLAB_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::ostringstream os;
    os << in.rdbuf();
    r.out = os.str();
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("help exits 0 and documents the flags") {
    const auto top = run_cli("--help");
    CHECK(top.exit_code == 0);
    CHECK(top.out.find("sweep") != std::string::npos);

    for (const std::string sub :
         {"sample", "graph", "spectrum", "continuum", "sweep", "cheeger", "invariance", "report"}) {
        const auto r = run_cli(sub + " --help");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("--") != std::string::npos);
    }
}

TEST_CASE("unknown subcommands and flags exit 1") {
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("sample --no-such-flag").exit_code == 1);
    CHECK(run_cli("").exit_code == 1); // a subcommand is required
}

TEST_CASE("sample writes a labeled csv") {
    const auto dir = fresh_dir("pqrlab_cli_sample");
    const auto r = run_cli("sample --density expmix --omega 0.25 -n 64 --seed 3 --output-dir " +
                           dir.string());
    CHECK(r.exit_code == 0);
    std::ifstream csv(dir / "samples.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "x0,x1,label");
    int rows = 0;
    for (std::string line; std::getline(csv, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 64);
    fs::remove_all(dir);
}

TEST_CASE("graph exports matrix market files") {
    const auto dir = fresh_dir("pqrlab_cli_graph");
    const auto r = run_cli("graph --density piecewise --epsilon 0.25 -n 128 -q 2 --output-dir " +
                           dir.string());
    CHECK(r.exit_code == 0);
    std::ifstream mtx(dir / "weights.mtx");
    REQUIRE(mtx.good());
    std::string header;
    std::getline(mtx, header);
    CHECK(header.rfind("%%MatrixMarket", 0) == 0);
    CHECK(fs::exists(dir / "raw_weights.mtx"));
    fs::remove_all(dir);
}

TEST_CASE("spectrum writes json and csv") {
    const auto dir = fresh_dir("pqrlab_cli_spectrum");
    const auto r = run_cli(
        "spectrum --density piecewise --epsilon 0.25 -n 200 -p 1 -q 2 -r 1 -k 4 --scale "
        "--output-dir " +
        dir.string());
    CHECK(r.exit_code == 0);
    std::ifstream js(dir / "spectrum.json");
    REQUIRE(js.good());
    const auto j = nlohmann::json::parse(js);
    CHECK(j["eigenvalues"].size() == 4);
    CHECK(j["scale_applied"].is_number());
    CHECK(std::abs(j["eigenvalues"][0].get<double>()) < 1e-8);
    fs::remove_all(dir);
}

TEST_CASE("continuum solves the reference problem") {
    const auto dir = fresh_dir("pqrlab_cli_continuum");
    const auto r = run_cli(
        "continuum --density erf --geometry paper-2 --epsilon 0.05 -p 1 -q 2 -r 1 "
        "--n-cells 24 -k 2 --export-eigenfunctions --output-dir " +
        dir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "spectrum.json"));
    std::ifstream ef(dir / "eigenfunction_2.csv");
    REQUIRE(ef.good());
    std::string header;
    std::getline(ef, header);
    CHECK(header == "node_x,node_y,v,u");
    fs::remove_all(dir);
}

TEST_CASE("cheeger prints the verdict on stdout") {
    const auto r = run_cli("cheeger --profile uniform -p 0.5 -q 1 -r 0.5");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("h=2") != std::string::npos);
    CHECK(r.out.find("bound=1") != std::string::npos);
    CHECK(r.out.find("sigma2=9.86") != std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("invariance prints the discrepancy") {
    const auto r = run_cli("invariance --p1 1 --r1 0 --p2 0.5 --r2 0.5 -q 2 -n 256");
    CHECK(r.exit_code == 0);
    REQUIRE(r.out.rfind("max_discrepancy=", 0) == 0);
    const double disc = std::stod(r.out.substr(std::string("max_discrepancy=").size()));
    CHECK(disc <= 1e-10);
}

TEST_CASE("sweep runs from a json config") {
    const auto dir = fresh_dir("pqrlab_cli_sweep");
    const auto cfg_path = fs::temp_directory_path() / "pqrlab_cli_sweep.json";
    {
        nlohmann::json cfg = {
            {"mode", "epsilon-discrete"},
            {"p", 1.0},
            {"q", 2.0},
            {"r", 1.0},
            {"density", {{"variant", "piecewise"}, {"epsilon", 0.25}}},
            {"sweep_values", {0.25, 0.125}},
            {"n_vertices", 200},
            {"trials", 2},
            {"k_eigen", 3},
        };
        std::ofstream out(cfg_path);
        out << cfg.dump(2);
    }
    const auto r = run_cli("sweep --config " + cfg_path.string() + " --jobs 1 --output-dir " +
                           dir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "results.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "plot.svg"));
    fs::remove_all(dir);
    fs::remove(cfg_path);
}

TEST_CASE("flags override config-file values") {
    const auto dir = fresh_dir("pqrlab_cli_precedence");
    const auto cfg_path = fs::temp_directory_path() / "pqrlab_cli_density.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"variant": "expmix", "omega": 0.5})";
    }
    // --omega on the command line wins over the file value
    const auto r = run_cli("sample --config " + cfg_path.string() +
                           " --omega 0.05 -n 4000 --seed 1 --output-dir " + dir.string());
    CHECK(r.exit_code == 0);
    std::ifstream csv(dir / "samples.csv");
    std::string line;
    std::getline(csv, line);
    int near_edges = 0, total = 0;
    while (std::getline(csv, line)) {
        const double t1 = std::stod(line.substr(0, line.find(',')));
        ++total;
        if (t1 < 0.2 || t1 > 0.8) ++near_edges;
    }
    // omega = 0.05 concentrates nearly all mass near the edges; 0.5 would not
    CHECK(total == 4000);
    CHECK(near_edges > 3800);
    fs::remove_all(dir);
    fs::remove(cfg_path);
}

TEST_CASE("exit code contract for each error class") {
    SUBCASE("domain/config error exits 1") {
        CHECK(run_cli("sweep").exit_code == 1); // missing --config
        CHECK(run_cli("sample --density nope").exit_code == 1);
        CHECK(run_cli("report --preset tab99").exit_code == 1);
        // vanishing density hits the assembly guard
        CHECK(run_cli("continuum --density piecewise --epsilon 0 --n-cells 8").exit_code == 1);
    }
    SUBCASE("numerical non-convergence exits 2") {
        const auto r = run_cli(
            "spectrum --density piecewise --epsilon 0.25 -n 1000 -p 1 -q 2 -r 1 --tol 1e-30 "
            "--output-dir " +
            fresh_dir("pqrlab_cli_nc").string());
        CHECK(r.exit_code == 2);
    }
    SUBCASE("io error exits 3") {
        const auto r = run_cli("sample --density expmix -n 8 --output-dir /dev/null/nope");
        CHECK(r.exit_code == 3);
    }
}
