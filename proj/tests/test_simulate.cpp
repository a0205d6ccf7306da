#include "latcor/simulate.hpp"

#include <doctest.h>

#include <cmath>

#include "latcor/gaussian.hpp"

using namespace latcor;

TEST_CASE("sample_bivariate extremes and determinism") {
    RandomStream a(5);
    const auto s1 = sample_bivariate(1.0, 50, a);
    for (int k = 0; k < 50; ++k) CHECK(s1.z2[k] == s1.z1[k]);

    RandomStream b1(99), b2(99);
    const auto d1 = sample_bivariate(0.4, 100, b1);
    const auto d2 = sample_bivariate(0.4, 100, b2);
    CHECK(d1.z1 == d2.z1);
    CHECK(d1.z2 == d2.z2);

    // substreams with different indices differ
    RandomStream c1 = RandomStream::substream(7, 0);
    RandomStream c2 = RandomStream::substream(7, 1);
    CHECK(c1.uniform() != c2.uniform());
}

TEST_CASE("sample_bivariate at rho=0 is uncorrelated") {
    RandomStream stream(61);
    const int n = 1'000'000;
    const auto s = sample_bivariate(0.0, n, stream);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int k = 0; k < n; ++k) {
        sxy += s.z1[k] * s.z2[k];
        sxx += s.z1[k] * s.z1[k];
        syy += s.z2[k] * s.z2[k];
    }
    CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 0.005);
}

TEST_CASE("bollen_thresholds") {
    CHECK(bollen_thresholds(2).cuts == std::vector<double>{0.0});
    const auto t3 = bollen_thresholds(3);
    CHECK(t3.cuts[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(t3.cuts[1] == doctest::Approx(1.0).epsilon(1e-14));
    const auto t5 = bollen_thresholds(5);
    CHECK(t5.cuts[0] == doctest::Approx(-1.8).epsilon(1e-14));
    CHECK(t5.cuts[1] == doctest::Approx(-0.6).epsilon(1e-14));
    CHECK(t5.cuts[2] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(t5.cuts[3] == doctest::Approx(1.8).epsilon(1e-14));
    CHECK_THROWS_AS(bollen_thresholds(1), std::invalid_argument);
    CHECK_THROWS_AS(bollen_thresholds(10), std::invalid_argument);
}

TEST_CASE("discretize is right-closed") {
    const Thresholds zero{{0.0}};
    const std::vector<double> z{0.0, 0.0001, -0.0001};
    const auto codes = discretize(z, zero);
    CHECK(codes == std::vector<int>{1, 2, 1});
}

TEST_CASE("discretize category proportions match the CDF increments") {
    RandomStream stream(62);
    const int n = 1'000'000;
    std::vector<double> z(n);
    for (double& v : z) v = stream.normal();
    const Thresholds th = bollen_thresholds(5);
    const auto codes = discretize(z, th);
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(5);
    for (int c : codes) freq(c - 1) += 1.0;
    freq /= n;
    for (int i = 0; i < 5; ++i) {
        const auto iv = th.interval(i);
        const double mass = gaussian::cdf(iv.hi) - gaussian::cdf(iv.lo);
        CHECK(std::abs(freq(i) - mass) <= 0.003);
    }
}

TEST_CASE("run_simulation is unbiased at rho=0 and deterministic") {
    SimConfig cfg;
    cfg.rho = 0.0;
    cfg.n = 200;
    cfg.s = 3;
    cfg.r = 3;
    cfg.reps = 400;
    cfg.seed = 63;
    cfg.run_irls = true;
    cfg.run_ml = false;

    const SimReport rep1 = run_simulation(cfg);
    REQUIRE(rep1.irls.has_value());
    const auto& st = *rep1.irls;
    CHECK(!st.bias_is_relative);  // MB substituted exactly when rho = 0
    REQUIRE(st.bias.has_value());
    REQUIRE(st.sd.has_value());
    CHECK(std::abs(*st.bias) <= 3.0 * *st.sd / std::sqrt(static_cast<double>(cfg.reps)));

    // identical config -> identical report
    const SimReport rep2 = run_simulation(cfg);
    CHECK(*rep2.irls->mean == *st.mean);
    CHECK(*rep2.irls->sd == *st.sd);
    CHECK(*rep2.irls->msd == *st.msd);
    CHECK(rep2.irls->failures == st.failures);
}

TEST_CASE("run_simulation metrics identity RMSE^2 = SD^2 + (MEAN - rho)^2") {
    SimConfig cfg;
    cfg.rho = 0.4;
    cfg.n = 100;
    cfg.s = 2;
    cfg.r = 2;
    cfg.reps = 300;
    cfg.seed = 64;
    const SimReport rep = run_simulation(cfg);
    const auto& st = *rep.irls;
    const double lhs = *st.rmse * *st.rmse;
    const double rhs = *st.sd * *st.sd + (*st.mean - cfg.rho) * (*st.mean - cfg.rho);
    CHECK(std::abs(lhs - rhs) <= 1e-12);
    CHECK(st.bias_is_relative);
    CHECK(*st.bias == doctest::Approx((*st.mean - 0.4) / 0.4).epsilon(1e-12));
}

TEST_CASE("run_simulation counts and excludes failures") {
    SimConfig cfg;
    cfg.rho = 0.0;
    cfg.n = 4;  // tiny samples often miss a category entirely
    cfg.s = 2;
    cfg.r = 2;
    cfg.reps = 200;
    cfg.seed = 65;
    cfg.run_ml = true;
    const SimReport rep = run_simulation(cfg);
    // degenerate tables fail both; IRLS additionally breaks down on some
    // near-perfect-association tables that the floored ML survives
    CHECK(rep.irls->failures > 0);
    CHECK(rep.ml->failures > 0);
    CHECK(rep.irls->failures >= rep.ml->failures);
    CHECK(rep.irls->attempts == 200);
    CHECK(rep.irls->mean.has_value());  // surviving replications still aggregate
}

TEST_CASE("run_simulation polyserial branch works and reps=1 leaves SD absent") {
    SimConfig cfg;
    cfg.rho = 0.4;
    cfg.n = 500;
    cfg.s = 2;
    cfg.reps = 1;
    cfg.seed = 66;
    const SimReport rep = run_simulation(cfg);
    REQUIRE(rep.irls.has_value());
    CHECK(rep.irls->mean.has_value());
    CHECK(!rep.irls->sd.has_value());
    CHECK(!rep.ml.has_value());
}

TEST_CASE("run_simulation validates its configuration") {
    SimConfig cfg;
    cfg.reps = 0;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);
    cfg.reps = 10;
    cfg.n = 2;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);
    cfg.n = 100;
    cfg.s = 11;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);
    cfg.s = 3;
    cfg.run_irls = false;
    cfg.run_ml = false;
    CHECK_THROWS_AS(run_simulation(cfg), std::invalid_argument);
}

TEST_CASE("benchmark requires both estimators and scales with reps") {
    SimConfig cfg;
    cfg.rho = 0.4;
    cfg.n = 200;
    cfg.s = 3;
    cfg.r = 3;
    cfg.reps = 40;
    cfg.seed = 67;
    cfg.run_ml = false;
    CHECK_THROWS_AS(benchmark(cfg), std::invalid_argument);

    cfg.run_ml = true;
    const BenchmarkReport b1 = benchmark(cfg);
    CHECK(b1.irls_seconds > 0.0);
    CHECK(b1.ml_seconds > 0.0);

    SimConfig doubled = cfg;
    doubled.reps = 80;
    const BenchmarkReport b2 = benchmark(doubled);
    // ML dominates the wall clock; doubling reps should roughly double it
    CHECK(b2.ml_seconds > 1.0 * b1.ml_seconds);
    CHECK(b2.ml_seconds < 4.0 * b1.ml_seconds);
}
