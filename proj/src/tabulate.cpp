#include "latcor/tabulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "latcor/errors.hpp"

namespace latcor {

ContingencyTable ContingencyTable::from_counts(Eigen::MatrixXd counts) {
    if (counts.rows() < 2 || counts.cols() < 2)
        throw degenerate_error("contingency table must be at least 2x2");
    if ((counts.array() < 0.0).any())
        throw std::invalid_argument("contingency table counts must be nonnegative");
    const double total = counts.sum();
    if (!(total > 0.0)) throw degenerate_error("contingency table has no observations");
    return ContingencyTable{std::move(counts), total};
}

CrosstabResult crosstab(std::span<const int> x, std::span<const int> y) {
    if (x.size() != y.size()) throw std::invalid_argument("crosstab: series length mismatch");
    if (x.size() < 2) throw std::invalid_argument("crosstab: need at least two observations");

    std::map<int, int> xm, ym;  // code -> dense index, sorted by code
    for (int v : x) xm.emplace(v, 0);
    for (int v : y) ym.emplace(v, 0);
    if (xm.size() < 2) throw degenerate_error("crosstab: fewer than 2 observed x categories");
    if (ym.size() < 2) throw degenerate_error("crosstab: fewer than 2 observed y categories");

    CrosstabResult out;
    for (auto& [code, idx] : xm) {
        idx = static_cast<int>(out.x_codes.size());
        out.x_codes.push_back(code);
    }
    for (auto& [code, idx] : ym) {
        idx = static_cast<int>(out.y_codes.size());
        out.y_codes.push_back(code);
    }

    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xm.size()),
                                                   static_cast<Eigen::Index>(ym.size()));
    for (std::size_t k = 0; k < x.size(); ++k) counts(xm[x[k]], ym[y[k]]) += 1.0;
    out.table = ContingencyTable::from_counts(std::move(counts));
    return out;
}

ProportionTable proportions(const ContingencyTable& t) {
    ProportionTable p;
    p.cell = t.counts / t.n;
    p.row_marginal = p.cell.rowwise().sum();
    p.col_marginal = p.cell.colwise().sum().transpose();
    if ((p.row_marginal.array() <= 0.0).any() || (p.col_marginal.array() <= 0.0).any())
        throw degenerate_error("proportions: empty row or column (collapse the table first)");

    auto cumulate = [](const Eigen::VectorXd& m) {
        Eigen::VectorXd c(m.size());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            acc += m(i);
            c(i) = acc;
        }
        c(m.size() - 1) = 1.0;  // pin the last element against rounding drift
        return c;
    };
    p.cum_row = cumulate(p.row_marginal);
    p.cum_col = cumulate(p.col_marginal);
    return p;
}

Thresholds thresholds_from_marginals(const Eigen::VectorXd& cum) {
    if (cum.size() < 2) throw degenerate_error("thresholds: need at least two categories");
    Thresholds th;
    th.cuts.reserve(static_cast<std::size_t>(cum.size()) - 1);
    double prev = -gaussian::kInf;
    for (Eigen::Index i = 0; i + 1 < cum.size(); ++i) {
        if (!(cum(i) > 0.0 && cum(i) < 1.0))
            throw degenerate_error("thresholds: empty category before the last");
        const double a = gaussian::quantile(cum(i));
        if (!(a > prev)) throw degenerate_error("thresholds: cumulative proportions not increasing");
        th.cuts.push_back(a);
        prev = a;
    }
    return th;
}

GroupedSummary grouped_summary(std::span<const int> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("grouped_summary: series length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("grouped_summary: need at least two observations");

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (static_cast<double>(n) - 1.0));
    if (!(sd > 0.0)) throw degenerate_error("grouped_summary: y has zero variance");

    std::map<int, int> cm;
    for (int v : x) cm.emplace(v, 0);
    if (cm.size() < 2) throw degenerate_error("grouped_summary: fewer than 2 observed categories");

    GroupedSummary g;
    for (auto& [code, idx] : cm) {
        idx = static_cast<int>(g.codes.size());
        g.codes.push_back(code);
    }
    const auto s = static_cast<Eigen::Index>(cm.size());
    g.n = Eigen::VectorXd::Zero(s);
    g.ybar = Eigen::VectorXd::Zero(s);
    for (std::size_t k = 0; k < n; ++k) {
        const int i = cm[x[k]];
        g.n(i) += 1.0;
        g.ybar(i) += (y[k] - mean) / sd;
    }
    g.ybar.array() /= g.n.array();
    g.total = static_cast<double>(n);
    g.y_mean = mean;
    g.y_sd = sd;
    return g;
}

ProportionCovariance proportion_covariance(const ProportionTable& p, double n) {
    if (!(n >= 1.0)) throw std::invalid_argument("proportion_covariance: n must be >= 1");
    const Eigen::Index cells = p.rows() * p.cols();
    Eigen::VectorXd stacked(cells);
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) stacked(i * p.cols() + j) = p.cell(i, j);

    ProportionCovariance cov;
    cov.b = (stacked.asDiagonal().toDenseMatrix() - stacked * stacked.transpose()) / n;
    return cov;
}

CollapseResult collapse_empty(const ContingencyTable& t) {
    std::vector<int> rows, cols;
    for (Eigen::Index i = 0; i < t.rows(); ++i)
        if (t.counts.row(i).sum() > 0.0) rows.push_back(static_cast<int>(i));
    for (Eigen::Index j = 0; j < t.cols(); ++j)
        if (t.counts.col(j).sum() > 0.0) cols.push_back(static_cast<int>(j));
    if (rows.size() < 2 || cols.size() < 2)
        throw degenerate_error("collapse_empty: table collapses below 2x2");

    Eigen::MatrixXd counts(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                t.counts(rows[i], cols[j]);

    CollapseResult out{ContingencyTable::from_counts(std::move(counts)), std::move(rows),
                       std::move(cols)};
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: series length mismatch");
    if (x.size() < 3) throw std::invalid_argument("pearson: need at least three observations");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx;
        const double dy = y[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw degenerate_error("pearson: constant input series");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::min(std::max(r, -1.0), 1.0);
}

}  // namespace latcor
