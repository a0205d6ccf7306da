#include "latcor/dataset.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "latcor/errors.hpp"
#include "latcor/matrix.hpp"
#include "latcor/polyserial.hpp"
#include "latcor/simulate.hpp"
#include "latcor/tabulate.hpp"

using namespace latcor;

TEST_CASE("read_csv parses, infers kinds, and handles missing cells") {
    std::istringstream in(
        "item,score , note\n"
        "1,2.5,7\n"
        "2,NA,8\n"
        "3,1.25,\n"
        "1,0.5,9\n");
    const Dataset ds = read_csv(in);
    REQUIRE(ds.columns.size() == 3);
    CHECK(ds.rows == 4);
    CHECK(ds.columns[0].name == "item");
    CHECK(ds.columns[1].name == "score");
    CHECK(ds.columns[2].name == "note");
    CHECK(ds.columns[0].kind == ColumnKind::ordinal);
    CHECK(ds.columns[1].kind == ColumnKind::continuous);
    CHECK(ds.columns[2].kind == ColumnKind::ordinal);
    CHECK(ds.columns[1].missing[1] == 1);
    CHECK(ds.columns[2].missing[2] == 1);
    CHECK(ds.find("score") == &ds.columns[1]);
    CHECK(ds.find("absent") == nullptr);
}

TEST_CASE("read_csv rejects malformed input") {
    std::istringstream bad_field("a,b\n1,oops\n");
    CHECK_THROWS_AS(read_csv(bad_field), std::runtime_error);
    std::istringstream short_row("a,b\n1\n");
    CHECK_THROWS_AS(read_csv(short_row), std::runtime_error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv(empty), std::runtime_error);
    CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), std::runtime_error);
}

namespace {

Column make_column(std::string name, ColumnKind kind, std::vector<double> values) {
    Column c;
    c.name = std::move(name);
    c.kind = kind;
    c.missing.assign(values.size(), 0);
    c.values = std::move(values);
    return c;
}

}  // namespace

TEST_CASE("estimate_pair dispatches on column kinds") {
    RandomStream stream(71);
    const auto sample = sample_bivariate(0.5, 800, stream);
    const auto xc = discretize(sample.z1, bollen_thresholds(2));
    const auto yc = discretize(sample.z2, bollen_thresholds(3));

    std::vector<double> xd(xc.begin(), xc.end()), yd(yc.begin(), yc.end());
    const Column xo = make_column("x", ColumnKind::ordinal, xd);
    const Column yo = make_column("y", ColumnKind::ordinal, yd);
    const Column ycont = make_column("yc", ColumnKind::continuous, sample.z2);

    const PairEstimate tetra = estimate_pair(xo, xo.name == "x" ? yo : yo);
    CHECK(tetra.ok());
    CHECK(tetra.method == "polychoric");  // 2x3 table

    const PairEstimate ps = estimate_pair(xo, ycont);
    CHECK(ps.ok());
    CHECK(ps.method == "polyserial");
    const PolyserialFit direct = fit_polyserial(grouped_summary(xc, sample.z2));
    CHECK(ps.rho == direct.rho);
    CHECK(ps.se == direct.se);

    const PairEstimate pp = estimate_pair(ycont, ycont);
    CHECK(pp.method == "pearson");
    CHECK(pp.rho == doctest::Approx(1.0));
    CHECK(std::isnan(pp.se));

    // reversed argument order still finds the ordinal side
    const PairEstimate ps2 = estimate_pair(ycont, xo);
    CHECK(ps2.method == "polyserial");
    CHECK(ps2.rho == ps.rho);

    const Column constant = make_column("c", ColumnKind::continuous,
                                        std::vector<double>(800, 3.25));
    const PairEstimate broken = estimate_pair(ycont, constant);
    CHECK(!broken.ok());
    CHECK(!broken.error.empty());
}

TEST_CASE("estimate_pair drops incomplete rows pairwise") {
    Column x = make_column("x", ColumnKind::continuous, {1.0, 2.0, 3.0, 4.0, 5.0});
    Column y = make_column("y", ColumnKind::continuous, {2.0, 4.0, 0.0, 8.0, 10.0});
    y.missing[2] = 1;
    const PairEstimate est = estimate_pair(x, y);
    CHECK(est.n_used == 4);
    CHECK(est.rho == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlation_matrix is schedule-invariant and marks absent entries") {
    RandomStream stream(72);
    const int n = 300;
    std::vector<double> f(n);
    for (double& v : f) v = stream.normal();

    Dataset ds;
    ds.rows = n;
    for (int c = 0; c < 4; ++c) {
        std::vector<double> z(n);
        for (int k = 0; k < n; ++k) z[k] = 0.7 * f[k] + 0.714 * stream.normal();
        if (c < 2) {
            const auto codes = discretize(z, bollen_thresholds(4));
            std::vector<double> vals(codes.begin(), codes.end());
            ds.columns.push_back(make_column("o" + std::to_string(c), ColumnKind::ordinal, vals));
        } else {
            ds.columns.push_back(
                make_column("c" + std::to_string(c), ColumnKind::continuous, z));
        }
    }
    ds.columns.push_back(
        make_column("const", ColumnKind::continuous, std::vector<double>(n, 1.0)));

    const MatrixResult serial = correlation_matrix(ds, 1);
    const MatrixResult parallel = correlation_matrix(ds, 4);
    REQUIRE(serial.names.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) {
            const auto& a = serial.at(i, j);
            const auto& b = parallel.at(i, j);
            CHECK(a.ok() == b.ok());
            if (a.ok()) {
                CHECK(a.rho == b.rho);
                CHECK(a.method == b.method);
            }
            // symmetric access
            CHECK(&serial.at(i, j) == &serial.at(j, i));
        }
    }
    // the constant column's pairs are absent, the run continued
    for (std::size_t j = 0; j < 4; ++j) CHECK(!serial.at(4, j).ok());
    CHECK(serial.at(0, 1).method == "polychoric");
    CHECK(serial.at(0, 2).method == "polyserial");
    CHECK(serial.at(2, 3).method == "pearson");
}

TEST_CASE("correlation_matrix at survey scale") {
    // 25 six-point items over 2800 rows, one common factor
    RandomStream stream(73);
    const int n = 2800, items = 25;
    std::vector<double> f(n);
    for (double& v : f) v = stream.normal();
    Dataset ds;
    ds.rows = n;
    for (int c = 0; c < items; ++c) {
        std::vector<double> z(n);
        for (int k = 0; k < n; ++k) z[k] = 0.6 * f[k] + 0.8 * stream.normal();
        const auto codes = discretize(z, bollen_thresholds(6));
        std::vector<double> vals(codes.begin(), codes.end());
        ds.columns.push_back(make_column("q" + std::to_string(c + 1), ColumnKind::ordinal, vals));
    }
    const MatrixResult res = correlation_matrix(ds, 4);
    int ok = 0;
    double total_seconds = 0.0;
    for (std::size_t i = 0; i < res.names.size(); ++i) {
        for (std::size_t j = i + 1; j < res.names.size(); ++j) {
            const auto& e = res.at(i, j);
            if (e.ok()) ++ok;
            CHECK(e.seconds >= 0.0);
            total_seconds += e.seconds;
        }
    }
    CHECK(ok == items * (items - 1) / 2);
    CHECK(total_seconds > 0.0);
}
