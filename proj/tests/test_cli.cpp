// End-to-end checks of the installed binary: golden byte-for-byte
// agreement with library calls, exit codes, and output determinism.
#include <doctest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "latcor/dataset.hpp"
#include "latcor/matrix.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LATCOR_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), got);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path fixtures_dir() {
    const fs::path dir = fs::temp_directory_path() / "latcor_cli_tests";
    fs::create_directories(dir);
    return dir;
}

// The rho=0.5 zero-threshold population table, as raw observations:
// counts (3333, 1667, 1667, 3333).
fs::path population_fixture() {
    const fs::path path = fixtures_dir() / "population_2x2.csv";
    std::ofstream out(path);
    out << "x,y\n";
    const int counts[2][2] = {{3333, 1667}, {1667, 3333}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < counts[i][j]; ++k) out << i + 1 << "," << j + 1 << "\n";
    return path;
}

fs::path mixed_fixture() {
    const fs::path path = fixtures_dir() / "mixed.csv";
    std::ofstream out(path);
    out << "a,b,c\n";
    // a: binary codes, b: continuous, c: constant
    const double rows[8][2] = {{1, -1.2}, {1, -0.4}, {2, 0.3}, {2, 1.7},
                               {1, -0.9}, {2, 0.8},  {1, 0.1}, {2, 1.1}};
    for (const auto& r : rows) out << r[0] << "," << r[1] << ",5\n";
    return path;
}

}  // namespace

TEST_CASE("estimate output is byte-identical to the library result") {
    const fs::path fixture = population_fixture();
    const RunResult run = run_cli("estimate --file " + fixture.string() +
                                  " --x x --y y --format json");
    CHECK(run.exit_code == 0);

    const latcor::Dataset ds = latcor::read_csv_file(fixture.string());
    const latcor::PairEstimate est =
        latcor::estimate_pair(*ds.find("x"), *ds.find("y"));
    REQUIRE(est.ok());
    CHECK(est.method == "tetrachoric");
    json expect;
    expect["method"] = est.method;
    expect["rho"] = est.rho;
    expect["se"] = est.se;
    expect["iterations"] = est.iterations;
    expect["converged"] = est.converged;
    expect["n"] = est.n_used;
    CHECK(run.out == expect.dump() + "\n");

    // the fixed point sits near the population rho
    CHECK(est.rho == doctest::Approx(0.497).epsilon(5e-3));
}

TEST_CASE("estimate exit codes") {
    const fs::path fixture = mixed_fixture();
    CHECK(run_cli("estimate --file " + fixture.string() + " --x a --y b").exit_code == 0);
    CHECK(run_cli("estimate --file " + fixture.string() + " --x a --y nope").exit_code == 2);
    CHECK(run_cli("estimate --file /does/not/exist.csv --x a --y b").exit_code == 2);
    CHECK(run_cli("estimate --file " + fixture.string() + " --x a --y c").exit_code == 2);
    CHECK(run_cli("estimate --file " + fixture.string() + " --x a").exit_code == 1);
    CHECK(run_cli("nonsense").exit_code == 1);
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("estimate honors kind overrides") {
    const fs::path fixture = mixed_fixture();
    const RunResult as_ordinal = run_cli("estimate --file " + fixture.string() +
                                         " --x a --y b --format json");
    const RunResult as_pearson =
        run_cli("estimate --file " + fixture.string() +
                " --x a --y b --x-kind continuous --format json");
    const json jo = json::parse(as_ordinal.out);
    const json jp = json::parse(as_pearson.out);
    CHECK(jo["method"] == "polyserial");
    CHECK(jp["method"] == "pearson");
}

TEST_CASE("simulate output is deterministic and marks absent SD") {
    const std::string flags =
        "simulate --rho 0.4 --N 120 --s 2 --r 2 --reps 30 --seed 9 --estimators irls,ml";
    const RunResult a = run_cli(flags);
    const RunResult b = run_cli(flags);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);

    const RunResult single = run_cli(
        "simulate --rho 0.4 --N 200 --s 2 --reps 1 --seed 4 --format json");
    const json j = json::parse(single.out);
    CHECK(j["irls"]["sd"].is_null());
    CHECK(!j["irls"]["mean"].is_null());

    CHECK(run_cli("simulate --rho 0.4 --N 200 --s 2 --reps 0 --seed 4").exit_code == 1);
    CHECK(run_cli("simulate --rho 0.4 --N 200 --s 2 --estimators bogus").exit_code == 1);
}

TEST_CASE("trace emits converging iteration rows") {
    const fs::path fixture = population_fixture();
    const RunResult run = run_cli("trace --file " + fixture.string() + " --x x --y y");
    CHECK(run.exit_code == 0);

    std::vector<double> rhos;
    std::istringstream lines(run.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "iter,rho,e_x1,e_x2,E_Y1,E_Y2");
    while (std::getline(lines, line)) {
        const auto comma = line.find(',');
        const auto second = line.find(',', comma + 1);
        rhos.push_back(std::stod(line.substr(comma + 1, second - comma - 1)));
    }
    REQUIRE(rhos.size() >= 3);
    CHECK(std::abs(rhos.back() - rhos[rhos.size() - 2]) <= 1e-8);
    double prev = std::abs(rhos[1] - rhos[0]);
    for (std::size_t k = 2; k < rhos.size(); ++k) {
        const double diff = std::abs(rhos[k] - rhos[k - 1]);
        CHECK(diff <= prev + 1e-15);
        prev = diff;
    }

    // a continuous column is a usage error
    const fs::path mixed = mixed_fixture();
    CHECK(run_cli("trace --file " + mixed.string() + " --x a --y b").exit_code == 1);
}

TEST_CASE("matrix runs through degenerate columns and stays symmetric") {
    const fs::path fixture = mixed_fixture();
    const RunResult run =
        run_cli("matrix --file " + fixture.string() + " --format json --threads 2");
    CHECK(run.exit_code == 0);
    const json j = json::parse(run.out);
    CHECK(j["variables"].size() == 3);
    int absent = 0;
    for (const auto& p : j["pairs"]) {
        if (p.contains("error")) ++absent;
        CHECK(p.contains("seconds"));
    }
    CHECK(absent == 2);  // both pairs that touch the constant column
}

TEST_CASE("benchmark reports both estimators") {
    const RunResult run = run_cli("benchmark --rho 0.4 --N 100 --k 2 --reps 20 --seed 3");
    CHECK(run.exit_code == 0);
    CHECK(run.out.find("irls_seconds") != std::string::npos);
    CHECK(run.out.find("ml_vs_irls") != std::string::npos);
}
