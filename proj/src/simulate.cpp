#include "latcor/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "latcor/errors.hpp"
#include "latcor/gaussian.hpp"
#include "latcor/mle.hpp"
#include "latcor/polychoric.hpp"
#include "latcor/polyserial.hpp"

namespace latcor {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Collector {
    std::vector<double> estimates;
    std::vector<double> ses;
    int failures = 0;
    int nonconverged = 0;
    double seconds = 0.0;
};

EstimatorStats summarize(const Collector& c, double rho, int attempts) {
    EstimatorStats st;
    st.attempts = attempts;
    st.failures = c.failures;
    st.nonconverged = c.nonconverged;
    st.seconds = c.seconds;
    const auto n = c.estimates.size();
    if (n == 0) return st;
    const double dn = static_cast<double>(n);

    double mean = 0.0;
    for (double e : c.estimates) mean += e;
    mean /= dn;
    double sse_true = 0.0, sse_mean = 0.0;
    for (double e : c.estimates) {
        sse_true += (e - rho) * (e - rho);
        sse_mean += (e - mean) * (e - mean);
    }
    st.mean = mean;
    st.bias_is_relative = rho != 0.0;
    st.bias = st.bias_is_relative ? (mean - rho) / rho : mean - rho;
    st.rmse = std::sqrt(sse_true / dn);
    if (n >= 2) st.sd = std::sqrt(sse_mean / dn);
    if (!c.ses.empty()) {
        double msd = 0.0;
        for (double s : c.ses) msd += s;
        st.msd = msd / static_cast<double>(c.ses.size());
    }
    return st;
}

void validate(const SimConfig& cfg) {
    if (cfg.reps < 1) throw std::invalid_argument("simulation: reps must be >= 1");
    if (cfg.n < 4) throw std::invalid_argument("simulation: N must be >= 4");
    if (cfg.s < 2 || cfg.s > 9) throw std::invalid_argument("simulation: s must be in 2..9");
    if (cfg.r && (*cfg.r < 2 || *cfg.r > 9))
        throw std::invalid_argument("simulation: r must be in 2..9");
    if (!(std::abs(cfg.rho) <= 1.0)) throw std::invalid_argument("simulation: |rho| must be <= 1");
    if (!cfg.run_irls && !cfg.run_ml)
        throw std::invalid_argument("simulation: no estimator requested");
}

}  // namespace

RandomStream RandomStream::substream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed;
    std::uint64_t mixed = splitmix64(state);
    state = mixed + index;
    return RandomStream(splitmix64(state));
}

double RandomStream::uniform() {
    const std::uint64_t bits = engine_() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return gaussian::quantile(uniform()); }

BivariateSample sample_bivariate(double rho, int n, RandomStream& stream) {
    if (!(std::abs(rho) <= 1.0))
        throw std::domain_error("sample_bivariate: |rho| must be <= 1");
    const double scale = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    BivariateSample out;
    out.z1.resize(static_cast<std::size_t>(n));
    out.z2.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double z1 = stream.normal();
        const double eps = stream.normal();
        out.z1[static_cast<std::size_t>(k)] = z1;
        out.z2[static_cast<std::size_t>(k)] = rho * z1 + scale * eps;
    }
    return out;
}

Thresholds bollen_thresholds(int s) {
    if (s < 2 || s > 9) throw std::invalid_argument("bollen_thresholds: s must be in 2..9");
    Thresholds th;
    th.cuts.reserve(static_cast<std::size_t>(s) - 1);
    for (int k = 1; k < s; ++k) th.cuts.push_back(-3.0 + 6.0 * k / s);
    return th;
}

std::vector<int> discretize(std::span<const double> z, const Thresholds& th) {
    std::vector<int> codes(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const auto it = std::lower_bound(th.cuts.begin(), th.cuts.end(), z[k]);
        codes[k] = static_cast<int>(it - th.cuts.begin()) + 1;
    }
    return codes;
}

SimReport run_simulation(const SimConfig& cfg) {
    validate(cfg);

    Collector irls, ml;
    const Thresholds th_x = bollen_thresholds(cfg.s);
    const Thresholds th_y = cfg.r ? bollen_thresholds(*cfg.r) : Thresholds{};

    for (int rep = 0; rep < cfg.reps; ++rep) {
        RandomStream stream =
            RandomStream::substream(cfg.seed, static_cast<std::uint64_t>(rep));
        const BivariateSample sample = sample_bivariate(cfg.rho, cfg.n, stream);
        const std::vector<int> x = discretize(sample.z1, th_x);

        if (cfg.r) {
            const std::vector<int> y = discretize(sample.z2, th_y);
            ContingencyTable table;
            try {
                table = crosstab(x, y).table;
            } catch (const std::exception&) {
                if (cfg.run_irls) ++irls.failures;
                if (cfg.run_ml) ++ml.failures;
                continue;
            }
            if (cfg.run_irls) {
                const auto start = std::chrono::steady_clock::now();
                try {
                    const PolychoricFit fit = table.rows() == 2 && table.cols() == 2
                                                  ? fit_tetrachoric(table)
                                                  : fit_polychoric(table);
                    irls.estimates.push_back(fit.rho);
                    irls.ses.push_back(fit.se);
                    if (!fit.converged) ++irls.nonconverged;
                } catch (const std::exception&) {
                    ++irls.failures;
                }
                irls.seconds += elapsed_seconds(start);
            }
            if (cfg.run_ml) {
                const auto start = std::chrono::steady_clock::now();
                try {
                    const MlFit fit = fit_two_step(table);
                    ml.estimates.push_back(fit.rho);
                    if (!fit.converged) ++ml.nonconverged;
                } catch (const std::exception&) {
                    ++ml.failures;
                }
                ml.seconds += elapsed_seconds(start);
            }
        } else {
            if (cfg.run_irls) {
                const auto start = std::chrono::steady_clock::now();
                try {
                    const PolyserialFit fit = fit_polyserial(grouped_summary(x, sample.z2));
                    irls.estimates.push_back(fit.rho);
                    irls.ses.push_back(fit.se);
                    if (!fit.converged) ++irls.nonconverged;
                } catch (const std::exception&) {
                    ++irls.failures;
                }
                irls.seconds += elapsed_seconds(start);
            }
            if (cfg.run_ml) {
                const auto start = std::chrono::steady_clock::now();
                try {
                    const MlFit fit = fit_two_step(x, sample.z2);
                    ml.estimates.push_back(fit.rho);
                    if (!fit.converged) ++ml.nonconverged;
                } catch (const std::exception&) {
                    ++ml.failures;
                }
                ml.seconds += elapsed_seconds(start);
            }
        }
    }

    SimReport report;
    report.config = cfg;
    if (cfg.run_irls) report.irls = summarize(irls, cfg.rho, cfg.reps);
    if (cfg.run_ml) report.ml = summarize(ml, cfg.rho, cfg.reps);
    return report;
}

BenchmarkReport benchmark(const SimConfig& cfg) {
    if (!cfg.run_irls || !cfg.run_ml)
        throw std::invalid_argument("benchmark: both estimators must be requested");
    const SimReport report = run_simulation(cfg);
    BenchmarkReport bench;
    bench.reps = cfg.reps;
    bench.irls_seconds = report.irls->seconds;
    bench.ml_seconds = report.ml->seconds;
    bench.ratio = bench.irls_seconds > 0.0 ? bench.ml_seconds / bench.irls_seconds
                                           : std::numeric_limits<double>::infinity();
    return bench;
}

}  // namespace latcor
