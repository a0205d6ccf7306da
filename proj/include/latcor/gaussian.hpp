#pragma once

#include <limits>

namespace latcor::gaussian {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Half-open cell (lo, hi] on the latent scale.  Either bound may be
/// infinite; lo < hi is required.
struct Interval {
    double lo;
    double hi;
};

/// Standard normal density.  Infinite arguments give 0.
double pdf(double x);

/// x * pdf(x) with the limit value 0 at x = +-inf.
double xpdf(double x);

/// Standard normal CDF, accurate to ~1e-15 absolute.  cdf(-inf) = 0,
/// cdf(+inf) = 1.
double cdf(double x);

/// Upper tail P(Z > x), without the cancellation of 1 - cdf(x) for
/// large x.
double cdf_upper(double x);

/// Inverse standard normal CDF.  Rational approximation refined by one
/// Newton step on cdf; |cdf(quantile(p)) - p| <= 1e-9 over (0, 1).
/// Throws std::domain_error for p outside (0, 1).
double quantile(double p);

/// Mean of the standard normal truncated to (iv.lo, iv.hi]:
/// (pdf(lo) - pdf(hi)) / (cdf(hi) - cdf(lo)).
/// Throws degenerate_error if the interval mass underflows below 1e-300.
double truncated_mean(Interval iv);

/// (t - rho*z) / sqrt(1 - rho^2).  Throws std::domain_error if |rho| >= 1.
double residual_threshold(double t, double z, double rho);

/// P(Z1 <= h, Z2 <= k) for standard bivariate normal with correlation rho.
/// Gauss-Legendre quadrature of the single-integral representation
/// dPhi2/drho = phi2(h,k;rho); absolute error <= 1e-7 for |rho| <= 1 - 1e-12.
/// Throws std::domain_error for |rho| > 1 - 1e-12.
double bivariate_cdf(double h, double k, double rho);

/// P(Z1 in ax, Z2 in by) by inclusion-exclusion of four bivariate_cdf
/// values, clamped into [0, 1].
double cell_prob(Interval ax, Interval by, double rho);

}  // namespace latcor::gaussian
