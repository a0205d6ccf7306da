#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "latcor/tabulate.hpp"

namespace latcor {

/// Deterministic uniform/normal source.  Substreams are derived by
/// hashing (seed, index) so replications are independent of execution
/// order; normals come from the inverse-CDF transform, which keeps the
/// draws reproducible across platforms for a given uniform stream.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    static RandomStream substream(std::uint64_t seed, std::uint64_t index);

    /// Uniform draw strictly inside (0, 1).
    double uniform();

    /// Standard normal via quantile(uniform()).
    double normal();

private:
    std::mt19937_64 engine_;
};

struct BivariateSample {
    std::vector<double> z1;
    std::vector<double> z2;
};

/// N draws of (Z1, Z2) with Z2 = rho Z1 + sqrt(1-rho^2) eps.
BivariateSample sample_bivariate(double rho, int n, RandomStream& stream);

/// Equally spaced interior thresholds over [-3, 3]: t_k = -3 + 6k/s.
Thresholds bollen_thresholds(int s);

/// Right-closed interval assignment: category i when a_{i-1} < z <= a_i.
std::vector<int> discretize(std::span<const double> z, const Thresholds& th);

struct SimConfig {
    double rho = 0.0;
    int n = 100;
    int s = 2;
    std::optional<int> r;  // set: polychoric over s x r; unset: polyserial
    int reps = 1;
    std::uint64_t seed = 0;
    bool run_irls = true;
    bool run_ml = false;
};

struct EstimatorStats {
    int attempts = 0;
    int failures = 0;      // replications excluded because the fit errored
    int nonconverged = 0;  // flagged fits, still included in the metrics
    std::optional<double> mean;
    std::optional<double> bias;  // MRB, or MB when rho = 0
    bool bias_is_relative = true;
    std::optional<double> rmse;
    std::optional<double> sd;   // absent when fewer than 2 usable reps
    std::optional<double> msd;  // mean reported SE; IRLS only
    double seconds = 0.0;
};

struct SimReport {
    SimConfig config;
    std::optional<EstimatorStats> irls;
    std::optional<EstimatorStats> ml;
};

/// Runs cfg.reps independent replications, each on its own substream, and
/// aggregates MEAN / MRB (MB at rho = 0) / RMSE / SD / MSD per estimator.
/// Failures are excluded from the metrics and counted.
SimReport run_simulation(const SimConfig& cfg);

struct BenchmarkReport {
    int reps = 0;
    double irls_seconds = 0.0;
    double ml_seconds = 0.0;
    double ratio = 0.0;  // ml / irls
};

/// Times both estimators over identical replication inputs.  Requires
/// both estimators enabled in cfg.
BenchmarkReport benchmark(const SimConfig& cfg);

}  // namespace latcor
