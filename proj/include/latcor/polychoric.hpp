#pragma once

#include <Eigen/Dense>
#include <vector>

#include "latcor/tabulate.hpp"

namespace latcor {

/// Which response Jacobian feeds the delta-method covariance.
///   block_diagonal    — weight derivatives only, any table shape.
///   tetrachoric_full  — 2x2 only: weight derivatives plus the propagation
///                       of the column threshold, D = D1 + D2.
///   tetrachoric_d1    — 2x2 only: the D1 part alone (for quantifying the
///                       difference).
enum class JacobianKind { block_diagonal, tetrachoric_full, tetrachoric_d1 };

struct PolychoricIteration {
    int iteration = 0;
    Eigen::VectorXd e_x;  // predictors entering the iteration
    Eigen::VectorXd e_y;  // response means computed in the iteration
    double rho = 0.0;     // estimate produced by the iteration
};

struct PolychoricFit {
    double rho = 0.0;
    double se = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<PolychoricIteration> trace;
};

/// Loop state of one IRLS sweep; kept public so the pieces can be stepped
/// and inspected individually.
struct IterationState {
    Eigen::VectorXd e_x;
    Eigen::MatrixXd e_cell;
    Eigen::VectorXd e_y;
    Eigen::MatrixXd sigma;
};

struct WlsEstimate {
    double rho = 0.0;
    double variance = 0.0;
};

/// Truncated-normal predictor means per row category,
/// e_x_i = (pdf(a_{i-1}) - pdf(a_i)) / P_i.
Eigen::VectorXd initial_predictors(const Thresholds& th_a, const Eigen::VectorXd& row_marginal);

/// e_ij = E(Z2 | b_{j-1} < Z2 <= b_j, Z1 = e_x_i)
///      = rho e_x_i + sqrt(1-rho^2) * truncated mean of the standardized
///        residual over the transformed cell bounds.
Eigen::MatrixXd conditional_cell_means(double rho, const Eigen::VectorXd& e_x,
                                       const Thresholds& th_b);

/// E_Y_i = sum_j (P_ij / P_i.) e_ij.
Eigen::VectorXd response_means(const ProportionTable& p, const Eigen::MatrixXd& e_cell);

/// Block-diagonal dE_Y/dP with the cell means held constant; s rows by
/// s*r row-stacked columns.
Eigen::MatrixXd jacobian_general(const ProportionTable& p, const Eigen::MatrixXd& e_cell);

/// Full 2x4 Jacobian for the 2x2 table: the weight part D1 plus the
/// propagation D2 of the column threshold b = quantile(P_.1) through the
/// cell means.  `parts` selects D1+D2 or D1 alone.
Eigen::MatrixXd jacobian_2x2(const ProportionTable& p, const Eigen::MatrixXd& e_cell,
                             const Eigen::VectorXd& e_x, double rho, double b_cut,
                             JacobianKind parts = JacobianKind::tetrachoric_full);

/// Delta-method covariance Sigma = D B D'.
Eigen::MatrixXd response_covariance(const Eigen::MatrixXd& d, const ProportionCovariance& b);

/// Generalized least squares slope and its variance:
/// rho = (e_x' Sigma^-1 e_x)^-1 e_x' Sigma^-1 E_Y.  A ridge of
/// 1e-12 tr(Sigma)/s is added once if the factorization fails.
WlsEstimate weighted_estimate(const Eigen::VectorXd& e_x, const Eigen::VectorXd& e_y,
                              const Eigen::MatrixXd& sigma);

/// Predictor refresh: column response means E_Yx_j from e_cell, then the
/// conditional row means at Z2 = E_Yx_j, averaged over columns.
Eigen::VectorXd update_predictors(double rho, const ProportionTable& p,
                                  const Eigen::MatrixXd& e_cell, const Thresholds& th_a);

/// One IRLS sweep at rho_old: fills e_cell / e_y / sigma in `state`,
/// solves for the new slope, then refreshes state.e_x with it.  For the
/// block-diagonal Jacobian, Sigma = D B D' collapses to
/// (diag(v) - w w')/n with v_k = sum_j d_kj^2 P_kj and
/// w_k = sum_j d_kj P_kj, which is what this computes.
WlsEstimate polychoric_step(IterationState& state, double rho_old, const ProportionTable& p,
                            double n, const Thresholds& th_a, const Thresholds& th_b,
                            JacobianKind kind);

/// Full polychoric IRLS loop (block-diagonal Jacobian) on a collapsed
/// table.  Non-convergence after 100 iterations is flagged, not thrown.
PolychoricFit fit_polychoric(const ContingencyTable& t);
PolychoricFit fit_polychoric(const ProportionTable& p, double n);

/// Tetrachoric specialization: the same loop with the 2x4 appendix
/// Jacobian in the covariance computation.
PolychoricFit fit_tetrachoric(const ContingencyTable& t,
                              JacobianKind parts = JacobianKind::tetrachoric_full);
PolychoricFit fit_tetrachoric(const ProportionTable& p, double n,
                              JacobianKind parts = JacobianKind::tetrachoric_full);

}  // namespace latcor
