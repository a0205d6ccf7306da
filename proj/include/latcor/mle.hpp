#pragma once

#include <span>

#include "latcor/tabulate.hpp"

namespace latcor {

struct MlFit {
    double rho = 0.0;
    double loglik = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// sum_ij n_ij log pi_ij(rho) with the cell probabilities floored at
/// 1e-300 before the log; thresholds are held fixed.
double polychoric_loglik(double rho, const ContingencyTable& t, const Thresholds& a,
                         const Thresholds& b);

/// Polyserial log likelihood for standardized y: per observation
/// log pdf(y) + log of the conditional interval probability of its
/// category, floored at 1e-300.
double polyserial_loglik(double rho, std::span<const int> x, std::span<const double> y_std,
                         const Thresholds& a);

/// Two-step polychoric ML: thresholds from the marginals, then 1-D
/// maximization of the profile likelihood over rho by Brent's
/// golden-section / parabolic search to |drho| <= 1e-8.
MlFit fit_two_step(const ContingencyTable& t);

/// Two-step polyserial ML: standardizes y, thresholds from the category
/// proportions of x, then the same 1-D maximization.
MlFit fit_two_step(std::span<const int> x, std::span<const double> y);

}  // namespace latcor
