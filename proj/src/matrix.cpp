#include "latcor/matrix.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "latcor/errors.hpp"
#include "latcor/tabulate.hpp"

namespace latcor {

namespace {

struct PairData {
    std::vector<double> x;
    std::vector<double> y;
};

PairData complete_cases(const Column& x, const Column& y) {
    PairData d;
    const std::size_t n = std::min(x.values.size(), y.values.size());
    for (std::size_t k = 0; k < n; ++k) {
        if (x.missing[k] || y.missing[k]) continue;
        d.x.push_back(x.values[k]);
        d.y.push_back(y.values[k]);
    }
    return d;
}

std::vector<int> as_codes(const std::vector<double>& v, const std::string& name) {
    std::vector<int> codes;
    codes.reserve(v.size());
    for (double value : v) {
        if (value != std::floor(value) || std::abs(value) > 1e9)
            throw degenerate_error("ordinal column '" + name + "' contains non-integer values");
        codes.push_back(static_cast<int>(value));
    }
    return codes;
}

}  // namespace

PairEstimate estimate_pair(const Column& x, const Column& y) {
    PairEstimate out;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (x.kind == ColumnKind::ignore || y.kind == ColumnKind::ignore)
            throw std::invalid_argument("column is marked ignore");

        const PairData d = complete_cases(x, y);
        out.n_used = d.x.size();

        const bool x_ord = x.kind == ColumnKind::ordinal;
        const bool y_ord = y.kind == ColumnKind::ordinal;
        if (x_ord && y_ord) {
            const auto xt = crosstab(as_codes(d.x, x.name), as_codes(d.y, y.name));
            const bool tetra = xt.table.rows() == 2 && xt.table.cols() == 2;
            const PolychoricFit fit =
                tetra ? fit_tetrachoric(xt.table) : fit_polychoric(xt.table);
            out.method = tetra ? "tetrachoric" : "polychoric";
            out.rho = fit.rho;
            out.se = fit.se;
            out.iterations = fit.iterations;
            out.converged = fit.converged;
        } else if (x_ord || y_ord) {
            const auto& ord = x_ord ? x : y;
            const auto& ordv = x_ord ? d.x : d.y;
            const auto& contv = x_ord ? d.y : d.x;
            const PolyserialFit fit = fit_polyserial(grouped_summary(as_codes(ordv, ord.name), contv));
            out.method = "polyserial";
            out.rho = fit.rho;
            out.se = fit.se;
            out.iterations = fit.iterations;
            out.converged = fit.converged;
        } else {
            out.method = "pearson";
            out.rho = pearson(d.x, d.y);
            out.se = std::numeric_limits<double>::quiet_NaN();
            out.iterations = 0;
            out.converged = true;
        }
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

const PairEstimate& MatrixResult::at(std::size_t i, std::size_t j) const {
    if (i == j || i >= names.size() || j >= names.size())
        throw std::out_of_range("MatrixResult::at: bad pair index");
    if (i > j) std::swap(i, j);
    return pairs[i][j - i - 1];
}

MatrixResult correlation_matrix(const Dataset& ds, int threads) {
    MatrixResult result;
    std::vector<const Column*> active;
    for (const Column& c : ds.columns) {
        if (c.kind == ColumnKind::ignore) continue;
        active.push_back(&c);
        result.names.push_back(c.name);
    }
    if (active.size() < 2)
        throw degenerate_error("matrix: need at least two non-ignored columns");

    const std::size_t m = active.size();
    result.pairs.resize(m);
    std::vector<std::pair<std::size_t, std::size_t>> work;
    for (std::size_t i = 0; i < m; ++i) {
        result.pairs[i].resize(m - i - 1);
        for (std::size_t j = i + 1; j < m; ++j) work.emplace_back(i, j);
    }

    const int workers = std::max(1, threads);
    if (workers == 1) {
        for (const auto& [i, j] : work)
            result.pairs[i][j - i - 1] = estimate_pair(*active[i], *active[j]);
        return result;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= work.size()) return;
            const auto [i, j] = work[k];
            result.pairs[i][j - i - 1] = estimate_pair(*active[i], *active[j]);
        }
    };
    std::vector<std::thread> pool;
    const int spawn = std::min<std::size_t>(static_cast<std::size_t>(workers), work.size());
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return result;
}

}  // namespace latcor
