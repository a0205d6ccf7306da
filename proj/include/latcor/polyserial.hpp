#pragma once

#include <Eigen/Dense>
#include <vector>

#include "latcor/tabulate.hpp"

namespace latcor {

struct PolyserialFit {
    double rho = 0.0;
    double se = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::pair<int, double>> trace;  // (iteration, rho), entry 0 = initializer
};

/// Per-category moments of the response conditional on the observed
/// category.  mu is informational; the slope update uses e_x and sigma2.
struct CellMoments {
    Eigen::VectorXd e_x;
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma2;
    Eigen::VectorXd n;
};

/// e_x_i = (pdf(a_{i-1}) - pdf(a_i)) / P_i, the truncated-normal means of
/// the latent predictor per category.
Eigen::VectorXd cell_predictor_means(const Thresholds& th, const Eigen::VectorXd& marginals);

/// All per-category moments at once; mu_i = rho e_x_i.
CellMoments cell_moments(double rho, const Thresholds& th, const Eigen::VectorXd& marginals,
                         const Eigen::VectorXd& n);

/// sigma_i^2 = 1 + rho^2 (a_{i-1} pdf(a_{i-1}) - a_i pdf(a_i)) / P_i
///               - rho^2 (pdf(a_{i-1}) - pdf(a_i))^2 / P_i^2.
/// Throws numerical_error if any entry is nonpositive.
Eigen::VectorXd cell_response_variance(double rho, const Thresholds& th,
                                       const Eigen::VectorXd& marginals);

/// No-intercept weighted least squares slope sum(w x y) / sum(w x^2).
double wls_slope(const Eigen::VectorXd& e_x, const Eigen::VectorXd& e_y,
                 const Eigen::VectorXd& weights);

/// (sum n_i e_x_i^2 / sigma_i^2)^{-1}.
double polyserial_variance(const Eigen::VectorXd& e_x, const Eigen::VectorXd& sigma2,
                           const Eigen::VectorXd& n);

/// IRLS polyserial fit from grouped summaries: thresholds and predictor
/// means from the category proportions, then alternating variance and
/// slope updates from the Pearson start until |rho_new - rho_old| <= 1e-8
/// or 100 iterations.
PolyserialFit fit_polyserial(const GroupedSummary& g);

}  // namespace latcor
