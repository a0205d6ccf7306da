// latcor — polyserial / tetrachoric / polychoric correlation CLI.
//
// Subcommands: estimate, matrix, simulate, benchmark, trace.
// Exit codes: 0 success, 1 usage, 2 data error, 3 non-convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "latcor/dataset.hpp"
#include "latcor/errors.hpp"
#include "latcor/matrix.hpp"
#include "latcor/polychoric.hpp"
#include "latcor/simulate.hpp"
#include "latcor/tabulate.hpp"

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

latcor::ColumnKind parse_kind(const std::string& s) {
    if (s == "ordinal") return latcor::ColumnKind::ordinal;
    if (s == "continuous") return latcor::ColumnKind::continuous;
    if (s == "ignore") return latcor::ColumnKind::ignore;
    throw UsageError("unknown column kind: " + s);
}

const latcor::Column& require_column(const latcor::Dataset& ds, const std::string& name) {
    const latcor::Column* col = ds.find(name);
    if (!col) throw std::runtime_error("column not found: " + name);
    return *col;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

json pair_to_json(const latcor::PairEstimate& e) {
    json j;
    j["method"] = e.method;
    if (e.ok()) {
        j["rho"] = e.rho;
        j["se"] = std::isnan(e.se) ? json() : json(e.se);
        j["iterations"] = e.iterations;
        j["converged"] = e.converged;
        j["n"] = e.n_used;
    } else {
        j["error"] = e.error;
        j["n"] = e.n_used;
    }
    return j;
}

int cmd_estimate(const std::string& file, const std::string& xcol, const std::string& ycol,
                 const std::string& xkind, const std::string& ykind, const std::string& format) {
    latcor::Dataset ds = latcor::read_csv_file(file);
    latcor::Column x = require_column(ds, xcol);
    latcor::Column y = require_column(ds, ycol);
    if (!xkind.empty()) x.kind = parse_kind(xkind);
    if (!ykind.empty()) y.kind = parse_kind(ykind);
    if (x.kind == latcor::ColumnKind::ignore || y.kind == latcor::ColumnKind::ignore)
        throw UsageError("estimate: columns may not be marked ignore");

    const latcor::PairEstimate est = latcor::estimate_pair(x, y);
    if (!est.ok()) throw std::runtime_error(est.error);

    if (format == "json") {
        std::cout << pair_to_json(est).dump() << "\n";
    } else {
        std::cout << "method      " << est.method << "\n"
                  << "rho         " << fmt(est.rho) << "\n"
                  << "se          " << (std::isnan(est.se) ? std::string("-") : fmt(est.se))
                  << "\n"
                  << "iterations  " << est.iterations << "\n"
                  << "converged   " << (est.converged ? "yes" : "no") << "\n"
                  << "n           " << est.n_used << "\n";
    }
    return est.converged ? 0 : 3;
}

int cmd_matrix(const std::string& file, const std::vector<std::string>& ordinal,
               const std::vector<std::string>& continuous,
               const std::vector<std::string>& ignore, int threads,
               const std::string& format) {
    latcor::Dataset ds = latcor::read_csv_file(file);
    auto apply = [&](const std::vector<std::string>& names, latcor::ColumnKind kind) {
        for (const std::string& n : names) {
            latcor::Column* col = const_cast<latcor::Column*>(ds.find(n));
            if (!col) throw std::runtime_error("column not found: " + n);
            col->kind = kind;
        }
    };
    apply(ordinal, latcor::ColumnKind::ordinal);
    apply(continuous, latcor::ColumnKind::continuous);
    apply(ignore, latcor::ColumnKind::ignore);

    if (threads <= 0) {
        const char* env = std::getenv("LATCOR_THREADS");
        threads = env ? std::max(1, std::atoi(env)) : 1;
    }
    const latcor::MatrixResult res = latcor::correlation_matrix(ds, threads);
    const std::size_t m = res.names.size();

    if (format == "json") {
        json j;
        j["variables"] = res.names;
        json pairs = json::array();
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = i + 1; k < m; ++k) {
                const latcor::PairEstimate& e = res.at(i, k);
                json p = pair_to_json(e);
                p["x"] = res.names[i];
                p["y"] = res.names[k];
                p["seconds"] = e.seconds;
                pairs.push_back(std::move(p));
                total += e.seconds;
            }
        }
        j["pairs"] = std::move(pairs);
        j["total_seconds"] = total;
        std::cout << j.dump() << "\n";
        return 0;
    }

    auto cell = [&](std::size_t i, std::size_t k, bool se) -> std::string {
        if (i == k) return se ? "0" : "1";
        const latcor::PairEstimate& e = res.at(i, k);
        if (!e.ok()) return ".";
        if (se && std::isnan(e.se)) return "-";
        return fmt(se ? e.se : e.rho);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = i + 1; k < m; ++k) total += res.at(i, k).seconds;

    for (int se = 0; se < 2; ++se) {
        std::cout << (se ? "standard errors" : "estimates") << "\n";
        for (std::size_t i = 0; i < m; ++i) {
            std::cout << res.names[i];
            for (std::size_t k = 0; k < m; ++k) std::cout << "\t" << cell(i, k, se == 1);
            std::cout << "\n";
        }
        std::cout << "\n";
    }
    std::cout << "pairs\n";
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = i + 1; k < m; ++k) {
            const latcor::PairEstimate& e = res.at(i, k);
            std::cout << res.names[i] << " ~ " << res.names[k] << "\t";
            if (e.ok())
                std::cout << e.method << "\tn=" << e.n_used
                          << (e.converged ? "" : "\t[not converged]") << "\n";
            else
                std::cout << "absent: " << e.error << "\n";
        }
    }
    std::fprintf(stderr, "matrix: %zu pairs in %.3f s (%d thread%s)\n", m * (m - 1) / 2, total,
                 threads, threads == 1 ? "" : "s");
    return 0;
}

json stats_to_json(const latcor::EstimatorStats& st, bool with_msd) {
    json j;
    j["mean"] = st.mean ? json(*st.mean) : json();
    j[st.bias_is_relative ? "mrb" : "mb"] = st.bias ? json(*st.bias) : json();
    j["rmse"] = st.rmse ? json(*st.rmse) : json();
    j["sd"] = st.sd ? json(*st.sd) : json();
    if (with_msd) j["msd"] = st.msd ? json(*st.msd) : json();
    j["failures"] = st.failures;
    j["nonconverged"] = st.nonconverged;
    return j;
}

void print_stats_row(const char* name, const latcor::EstimatorStats& st) {
    auto opt = [](const std::optional<double>& v) {
        return v ? fmt(*v) : std::string("-");
    };
    std::cout << name << "\t" << opt(st.mean) << "\t" << opt(st.bias) << "\t" << opt(st.rmse)
              << "\t" << opt(st.sd) << "\t" << opt(st.msd) << "\t" << st.failures << "\t"
              << st.nonconverged << "\n";
}

int cmd_simulate(const latcor::SimConfig& cfg, const std::string& format) {
    const latcor::SimReport report = latcor::run_simulation(cfg);

    if (format == "json") {
        json j;
        j["config"] = {{"rho", cfg.rho},   {"N", cfg.n},
                       {"s", cfg.s},       {"r", cfg.r ? json(*cfg.r) : json()},
                       {"reps", cfg.reps}, {"seed", cfg.seed}};
        if (report.irls) j["irls"] = stats_to_json(*report.irls, true);
        if (report.ml) j["ml"] = stats_to_json(*report.ml, false);
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "estimator\tMEAN\t" << (cfg.rho == 0.0 ? "MB" : "MRB")
                  << "\tRMSE\tSD\tMSD\tfailures\tnonconverged\n";
        if (report.irls) print_stats_row("irls", *report.irls);
        if (report.ml) print_stats_row("ml", *report.ml);
    }
    // Wall time goes to stderr so stdout stays byte-stable across runs.
    double secs = 0.0;
    if (report.irls) secs += report.irls->seconds;
    if (report.ml) secs += report.ml->seconds;
    std::fprintf(stderr, "simulate: %d reps in %.3f s\n", cfg.reps, secs);
    return 0;
}

int cmd_benchmark(const latcor::SimConfig& cfg) {
    const latcor::BenchmarkReport bench = latcor::benchmark(cfg);
    std::printf("reps          %d\n", bench.reps);
    std::printf("irls_seconds  %.6f\n", bench.irls_seconds);
    std::printf("ml_seconds    %.6f\n", bench.ml_seconds);
    std::printf("ml_vs_irls    %.2fx\n", bench.ratio);
    return 0;
}

int cmd_trace(const std::string& file, const std::string& xcol, const std::string& ycol) {
    const latcor::Dataset ds = latcor::read_csv_file(file);
    const latcor::Column& x = require_column(ds, xcol);
    const latcor::Column& y = require_column(ds, ycol);
    if (x.kind != latcor::ColumnKind::ordinal || y.kind != latcor::ColumnKind::ordinal)
        throw UsageError("trace: both columns must be ordinal");

    std::vector<int> xc, yc;
    for (std::size_t k = 0; k < ds.rows; ++k) {
        if (x.missing[k] || y.missing[k]) continue;
        xc.push_back(static_cast<int>(x.values[k]));
        yc.push_back(static_cast<int>(y.values[k]));
    }
    const auto xt = latcor::crosstab(xc, yc);
    const bool tetra = xt.table.rows() == 2 && xt.table.cols() == 2;
    const latcor::PolychoricFit fit =
        tetra ? latcor::fit_tetrachoric(xt.table) : latcor::fit_polychoric(xt.table);

    const auto s = xt.table.rows();
    std::cout << "iter,rho";
    for (Eigen::Index i = 0; i < s; ++i) std::cout << ",e_x" << i + 1;
    for (Eigen::Index i = 0; i < s; ++i) std::cout << ",E_Y" << i + 1;
    std::cout << "\n";
    for (const latcor::PolychoricIteration& it : fit.trace) {
        std::printf("%d,%.12g", it.iteration, it.rho);
        for (Eigen::Index i = 0; i < s; ++i) std::printf(",%.12g", it.e_x(i));
        for (Eigen::Index i = 0; i < s; ++i) std::printf(",%.12g", it.e_y(i));
        std::printf("\n");
    }
    return fit.converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polyserial, tetrachoric and polychoric correlation estimation"};
    app.require_subcommand(1);

    std::string file, xcol, ycol, xkind, ykind;
    std::string format = "table";
    std::vector<std::string> ordinal, continuous, ignore;
    int threads = 0;

    double rho = 0.0;
    int n = 500, s = 2, reps = 1000, k = 0;
    int r_flag = 0;
    std::uint64_t seed = 0;
    std::string estimators = "irls";

    auto* est = app.add_subcommand("estimate", "Estimate the correlation of one column pair");
    est->add_option("--file,-f", file, "CSV file with a header row")->required();
    est->add_option("--x", xcol, "first column name")->required();
    est->add_option("--y", ycol, "second column name")->required();
    est->add_option("--x-kind", xkind, "override: ordinal|continuous");
    est->add_option("--y-kind", ykind, "override: ordinal|continuous");
    est->add_option("--format", format, "table|json")
        ->check(CLI::IsMember({"table", "json"}));

    auto* mat = app.add_subcommand("matrix", "Pairwise correlation matrix of all columns");
    mat->add_option("--file,-f", file, "CSV file with a header row")->required();
    mat->add_option("--ordinal", ordinal, "columns to treat as ordinal")->delimiter(',');
    mat->add_option("--continuous", continuous, "columns to treat as continuous")
        ->delimiter(',');
    mat->add_option("--ignore", ignore, "columns to skip")->delimiter(',');
    mat->add_option("--threads", threads, "worker threads (default: LATCOR_THREADS or 1)");
    mat->add_option("--format", format, "table|json")
        ->check(CLI::IsMember({"table", "json"}));

    auto* sim = app.add_subcommand("simulate", "Monte Carlo sweep of the estimators");
    sim->add_option("--rho", rho, "population correlation")->required();
    sim->add_option("--N", n, "sample size per replication")->required();
    sim->add_option("--s", s, "categories of X")->required();
    sim->add_option("--r", r_flag, "categories of Y (omit for polyserial)");
    sim->add_option("--reps", reps, "replications");
    sim->add_option("--seed", seed, "random seed");
    sim->add_option("--estimators", estimators, "comma list from {irls,ml}");
    sim->add_option("--format", format, "table|json")
        ->check(CLI::IsMember({"table", "json"}));

    auto* bench = app.add_subcommand("benchmark", "Time IRLS against the two-step ML oracle");
    bench->add_option("--rho", rho, "population correlation")->required();
    bench->add_option("--N", n, "sample size per replication")->required();
    bench->add_option("--k", k, "categories of both variables (sets s = r = k)");
    bench->add_option("--s", s, "categories of X");
    bench->add_option("--r", r_flag, "categories of Y");
    bench->add_option("--reps", reps, "replications");
    bench->add_option("--seed", seed, "random seed");

    auto* trc = app.add_subcommand("trace", "Per-iteration trace of a polychoric fit");
    trc->add_option("--file,-f", file, "CSV file with a header row")->required();
    trc->add_option("--x", xcol, "first column name (ordinal)")->required();
    trc->add_option("--y", ycol, "second column name (ordinal)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (est->parsed()) return cmd_estimate(file, xcol, ycol, xkind, ykind, format);
        if (mat->parsed()) return cmd_matrix(file, ordinal, continuous, ignore, threads, format);
        if (sim->parsed() || bench->parsed()) {
            latcor::SimConfig cfg;
            cfg.rho = rho;
            cfg.n = n;
            cfg.reps = reps;
            cfg.seed = seed;
            if (bench->parsed()) {
                if (k > 0) { cfg.s = k; cfg.r = k; }
                else { cfg.s = s; cfg.r = r_flag > 0 ? std::optional<int>(r_flag) : std::nullopt; }
                cfg.run_irls = true;
                cfg.run_ml = true;
                return cmd_benchmark(cfg);
            }
            cfg.s = s;
            if (sim->count("--r") > 0) cfg.r = r_flag;
            cfg.run_irls = false;
            cfg.run_ml = false;
            std::stringstream names(estimators);
            std::string name;
            while (std::getline(names, name, ',')) {
                if (name == "irls") cfg.run_irls = true;
                else if (name == "ml") cfg.run_ml = true;
                else throw UsageError("unknown estimator: " + name);
            }
            return cmd_simulate(cfg, format);
        }
        if (trc->parsed()) return cmd_trace(file, xcol, ycol);
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
