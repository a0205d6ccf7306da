#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "latcor/gaussian.hpp"

namespace latcor {

/// Observed s x r frequency table.  Counts are stored as doubles so that
/// exact population tables (real-valued expected counts) can flow through
/// the same estimators; ordinary use holds nonnegative integers.
struct ContingencyTable {
    Eigen::MatrixXd counts;  // s x r
    double n = 0.0;          // total count

    Eigen::Index rows() const { return counts.rows(); }
    Eigen::Index cols() const { return counts.cols(); }

    /// Validates shape (>= 2x2) and nonnegative entries with positive total.
    static ContingencyTable from_counts(Eigen::MatrixXd counts);
};

/// Cell proportions with marginals and cumulative marginals.
struct ProportionTable {
    Eigen::MatrixXd cell;          // P_ij, sums to 1
    Eigen::VectorXd row_marginal;  // P_i.
    Eigen::VectorXd col_marginal;  // P_.j
    Eigen::VectorXd cum_row;       // CP_i, last element 1
    Eigen::VectorXd cum_col;

    Eigen::Index rows() const { return cell.rows(); }
    Eigen::Index cols() const { return cell.cols(); }
};

/// Interior cut points a_1 < ... < a_{s-1}; a_0 = -inf and a_s = +inf are
/// implicit.
struct Thresholds {
    std::vector<double> cuts;

    std::size_t categories() const { return cuts.size() + 1; }
    /// Lower bound of category i (0-based): a_i with a_0 = -inf.
    double lower(std::size_t i) const { return i == 0 ? -gaussian::kInf : cuts[i - 1]; }
    /// Upper bound of category i (0-based): a_{i+1} with a_s = +inf.
    double upper(std::size_t i) const {
        return i == cuts.size() ? gaussian::kInf : cuts[i];
    }
    gaussian::Interval interval(std::size_t i) const { return {lower(i), upper(i)}; }
};

/// Per-category counts and means of the standardized continuous variable;
/// the whole input of the polyserial estimator.
struct GroupedSummary {
    Eigen::VectorXd n;     // per-category counts (weights)
    Eigen::VectorXd ybar;  // mean of standardized y within each category
    double total = 0.0;    // N
    double y_mean = 0.0;   // standardization constants of the raw y
    double y_sd = 1.0;     // sample SD, denominator N-1
    std::vector<int> codes;  // original category code per dense index
};

/// Multinomial covariance of the row-stacked cell proportions, B/N.
struct ProportionCovariance {
    Eigen::MatrixXd b;  // (s*r) x (s*r)
};

struct CrosstabResult {
    ContingencyTable table;
    std::vector<int> x_codes;  // original code per dense row index
    std::vector<int> y_codes;  // original code per dense column index
};

struct CollapseResult {
    ContingencyTable table;
    std::vector<int> row_map;  // old row index per new row
    std::vector<int> col_map;
};

/// Cross-tabulates two integer-coded series; observed codes are densified
/// in sorted order.  Throws on length mismatch or fewer than two observed
/// categories on either axis.
CrosstabResult crosstab(std::span<const int> x, std::span<const int> y);

/// Cell proportions plus marginals; throws degenerate_error on an empty
/// row or column (collapse first).
ProportionTable proportions(const ContingencyTable& t);

/// a_i = quantile(CP_i) for the interior cumulative proportions.  Throws
/// degenerate_error if any interior CP_i is 0 or 1.
Thresholds thresholds_from_marginals(const Eigen::VectorXd& cum);

/// Groups y by the categories of x after standardizing y to zero mean and
/// unit sample variance.  Unobserved codes simply do not appear; the codes
/// vector records which original code each dense category carries.
GroupedSummary grouped_summary(std::span<const int> x, std::span<const double> y);

/// B with diagonal P_i(1-P_i)/N and off-diagonal -P_i P_j / N over the
/// row-stacked cell index.
ProportionCovariance proportion_covariance(const ProportionTable& p, double n);

/// Removes empty rows and columns.  Throws degenerate_error if the result
/// would be smaller than 2x2.
CollapseResult collapse_empty(const ContingencyTable& t);

/// Sample Pearson correlation; throws degenerate_error on constant input.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace latcor
