#include "latcor/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "latcor/errors.hpp"

namespace latcor::gaussian {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kInvSqrt2 = 0.7071067811865475244008444;

// P(lo < Z <= hi) evaluated from whichever tail keeps the difference
// between like-sized quantities.
double interval_mass(double lo, double hi) {
    if (lo >= 0.0) return cdf_upper(lo) - cdf_upper(hi);
    return cdf(hi) - cdf(lo);
}

// 24-point Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on
// the Legendre polynomial.
struct GaussLegendre24 {
    std::array<double, 24> x{};
    std::array<double, 24> w{};
    GaussLegendre24() {
        constexpr int n = 24;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) < 1e-15) break;
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            w[n - 1 - i] = w[i];
        }
    }
};

const GaussLegendre24& rule24() {
    static const GaussLegendre24 rule;
    return rule;
}

// Integrand of the correlation representation after the substitution
// r = sin(theta): dPhi2/dtheta = exp(-(h^2+k^2-2hk sin t)/(2cos^2 t))/(2pi).
double phi2_theta(double h, double k, double t) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    return std::exp(-(h * h + k * k - 2.0 * h * k * s) / (2.0 * c * c)) / (2.0 * M_PI);
}

double integrate_panel(double h, double k, double a, double b) {
    const auto& gl = rule24();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < 24; ++i) sum += gl.w[i] * phi2_theta(h, k, mid + half * gl.x[i]);
    return sum * half;
}

// Phi2 for 0 < rho < 1 and finite h, k.  Panels double in width moving
// away from theta = pi/2 so the quadrature resolves the boundary layer
// that forms there as rho -> 1.
double bivariate_positive(double h, double k, double rho) {
    const double b = std::asin(rho);
    double integral = 0.0;
    double right = b;
    double u = M_PI / 2.0 - b;  // distance of the right edge to the singularity
    while (true) {
        double left = M_PI / 2.0 - 2.0 * u;
        if (left <= 0.5 * b || left >= right) {
            integral += integrate_panel(h, k, 0.0, right);
            break;
        }
        integral += integrate_panel(h, k, left, right);
        right = left;
        u *= 2.0;
    }
    return cdf(h) * cdf(k) + integral;
}

}  // namespace

double pdf(double x) {
    if (std::isinf(x)) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double xpdf(double x) {
    if (std::isinf(x)) return 0.0;
    return x * pdf(x);
}

double cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double cdf_upper(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile: p must lie in (0, 1)");

    // Acklam's rational approximation, ~1.15e-9 relative error.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double bc[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                     -1.556989798598866e+02, 6.680131188771972e+01,
                                     -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((bc[0] * r + bc[1]) * r + bc[2]) * r + bc[3]) * r + bc[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Newton step on cdf; skipped where pdf underflows (extreme tails).
    double density = pdf(x);
    if (density > 1e-280) x -= (cdf(x) - p) / density;
    return x;
}

double truncated_mean(Interval iv) {
    const double mass = interval_mass(iv.lo, iv.hi);
    if (!(mass >= 1e-300))
        throw degenerate_error("truncated_mean: interval probability underflows");
    return (pdf(iv.lo) - pdf(iv.hi)) / mass;
}

double residual_threshold(double t, double z, double rho) {
    if (!(std::abs(rho) < 1.0))
        throw std::domain_error("residual_threshold: |rho| must be < 1");
    return (t - rho * z) / std::sqrt(1.0 - rho * rho);
}

double bivariate_cdf(double h, double k, double rho) {
    if (!(std::abs(rho) <= 1.0 - 1e-12))
        throw std::domain_error("bivariate_cdf: |rho| must be <= 1 - 1e-12");

    if (h == -kInf || k == -kInf) return 0.0;
    if (h == kInf) return cdf(k);
    if (k == kInf) return cdf(h);
    if (h > k) std::swap(h, k);  // Phi2 is symmetric; fix the order so the
                                 // computed value is too

    double value;
    if (rho == 0.0) {
        value = cdf(h) * cdf(k);
    } else if (rho > 0.0) {
        value = bivariate_positive(h, k, rho);
    } else {
        value = cdf(h) - bivariate_positive(h, -k, -rho);
    }

    // Frechet bounds are exact; quadrature noise must not escape them.
    const double lo = std::max(0.0, cdf(h) + cdf(k) - 1.0);
    const double hi = std::min(cdf(h), cdf(k));
    return std::min(std::max(value, lo), hi);
}

double cell_prob(Interval ax, Interval by, double rho) {
    const double p = bivariate_cdf(ax.hi, by.hi, rho) - bivariate_cdf(ax.lo, by.hi, rho) -
                     bivariate_cdf(ax.hi, by.lo, rho) + bivariate_cdf(ax.lo, by.lo, rho);
    return std::min(std::max(p, 0.0), 1.0);
}

}  // namespace latcor::gaussian
