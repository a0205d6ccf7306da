#include "latcor/mle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "latcor/errors.hpp"
#include "latcor/gaussian.hpp"

namespace latcor {

namespace {

constexpr double kProbFloor = 1e-300;
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;

// Brent's 1-D minimizer (golden section with parabolic interpolation).
struct BrentResult {
    double x = 0.0;
    double fx = 0.0;
    int evaluations = 0;
    bool converged = false;
};

BrentResult brent_minimize(const std::function<double(double)>& f, double a, double b,
                           double tol_abs, int max_iter = 200) {
    constexpr double golden = 0.3819660112501051;
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());

    BrentResult res;
    double x = a + golden * (b - a);
    double w = x, v = x;
    double fx = f(x);
    res.evaluations = 1;
    double fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol = sqrt_eps * std::abs(x) + tol_abs;
        if (std::abs(x - m) <= 2.0 * tol - 0.5 * (b - a)) {
            res.converged = true;
            break;
        }
        double p = 0.0, q = 0.0, r = 0.0;
        bool use_golden = true;
        if (std::abs(e) > tol) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_old = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < 2.0 * tol || b - u < 2.0 * tol) d = x < m ? tol : -tol;
                use_golden = false;
            }
        }
        if (use_golden) {
            e = (x < m ? b : a) - x;
            d = golden * e;
        }
        const double u = x + (std::abs(d) >= tol ? d : (d > 0.0 ? tol : -tol));
        const double fu = f(u);
        ++res.evaluations;
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    res.x = x;
    res.fx = fx;
    return res;
}

MlFit maximize_profile(const std::function<double(double)>& loglik) {
    const BrentResult res =
        brent_minimize([&](double r) { return -loglik(r); }, -1.0 + 1e-6, 1.0 - 1e-6, 1e-8);
    MlFit fit;
    fit.rho = res.x;
    fit.loglik = -res.fx;
    fit.evaluations = res.evaluations;
    fit.converged = res.converged;
    return fit;
}

}  // namespace

double polychoric_loglik(double rho, const ContingencyTable& t, const Thresholds& a,
                         const Thresholds& b) {
    if (!(std::abs(rho) <= 1.0 - 1e-9))
        throw std::domain_error("polychoric_loglik: |rho| must be <= 1 - 1e-9");
    const auto s = t.rows();
    const auto r = t.cols();
    if (static_cast<Eigen::Index>(a.categories()) != s ||
        static_cast<Eigen::Index>(b.categories()) != r)
        throw std::invalid_argument("polychoric_loglik: threshold/table mismatch");

    // One bivariate CDF per grid corner, shared across the four cells
    // touching it.
    Eigen::MatrixXd grid(s + 1, r + 1);
    for (Eigen::Index i = 0; i <= s; ++i) {
        const double ai = i == 0 ? -gaussian::kInf : a.upper(static_cast<std::size_t>(i - 1));
        for (Eigen::Index j = 0; j <= r; ++j) {
            const double bj = j == 0 ? -gaussian::kInf : b.upper(static_cast<std::size_t>(j - 1));
            grid(i, j) = gaussian::bivariate_cdf(ai, bj, rho);
        }
    }
    double ll = 0.0;
    for (Eigen::Index i = 0; i < s; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) {
            const double pij =
                grid(i + 1, j + 1) - grid(i, j + 1) - grid(i + 1, j) + grid(i, j);
            ll += t.counts(i, j) * std::log(std::max(pij, kProbFloor));
        }
    }
    return ll;
}

double polyserial_loglik(double rho, std::span<const int> x, std::span<const double> y_std,
                         const Thresholds& a) {
    if (!(std::abs(rho) <= 1.0 - 1e-9))
        throw std::domain_error("polyserial_loglik: |rho| must be <= 1 - 1e-9");
    if (x.size() != y_std.size())
        throw std::invalid_argument("polyserial_loglik: series length mismatch");
    const int s = static_cast<int>(a.categories());

    double ll = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const int code = x[k];
        if (code < 1 || code > s)
            throw std::invalid_argument("polyserial_loglik: category code out of range");
        const double y = y_std[k];
        const auto iv = a.interval(static_cast<std::size_t>(code - 1));
        const double lo = gaussian::residual_threshold(iv.lo, y, rho);
        const double hi = gaussian::residual_threshold(iv.hi, y, rho);
        const double mass = gaussian::cdf(hi) - gaussian::cdf(lo);
        ll += -0.5 * y * y - kLogSqrt2Pi + std::log(std::max(mass, kProbFloor));
    }
    return ll;
}

MlFit fit_two_step(const ContingencyTable& t) {
    const ProportionTable p = proportions(t);
    const Thresholds a = thresholds_from_marginals(p.cum_row);
    const Thresholds b = thresholds_from_marginals(p.cum_col);
    return maximize_profile([&](double rho) { return polychoric_loglik(rho, t, a, b); });
}

MlFit fit_two_step(std::span<const int> x, std::span<const double> y) {
    const GroupedSummary g = grouped_summary(x, y);

    std::map<int, int> dense;
    for (std::size_t i = 0; i < g.codes.size(); ++i) dense[g.codes[i]] = static_cast<int>(i) + 1;
    std::vector<int> codes(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) codes[k] = dense.at(x[k]);

    std::vector<double> y_std(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) y_std[k] = (y[k] - g.y_mean) / g.y_sd;

    Eigen::VectorXd cum(g.n.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < g.n.size(); ++i) {
        acc += g.n(i) / g.total;
        cum(i) = acc;
    }
    cum(g.n.size() - 1) = 1.0;
    const Thresholds a = thresholds_from_marginals(cum);

    return maximize_profile(
        [&](double rho) { return polyserial_loglik(rho, codes, y_std, a); });
}

}  // namespace latcor
