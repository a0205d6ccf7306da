#include "latcor/polyserial.hpp"

#include <cmath>
#include <stdexcept>

#include "latcor/errors.hpp"
#include "latcor/gaussian.hpp"

namespace latcor {

namespace {

constexpr double kRhoBound = 1.0 - 1e-9;
constexpr double kTol = 1e-8;
constexpr int kMaxIter = 100;

double clamp_rho(double rho) { return std::min(std::max(rho, -kRhoBound), kRhoBound); }

// Pearson correlation of (dense code, standardized y) recovered from the
// summary: y is standardized with the N-1 denominator, so sum(y) = 0 and
// sum(y^2) = N-1 up to rounding.
double pearson_from_summary(const GroupedSummary& g) {
    const auto s = g.n.size();
    double sx = 0.0, sxx = 0.0, sxy = 0.0;
    for (Eigen::Index i = 0; i < s; ++i) {
        const double code = static_cast<double>(i) + 1.0;
        sx += code * g.n(i);
        sxx += code * code * g.n(i);
        sxy += code * g.n(i) * g.ybar(i);
    }
    const double varx = sxx - sx * sx / g.total;
    if (!(varx > 0.0)) throw degenerate_error("polyserial: x codes are constant");
    return sxy / std::sqrt(varx * (g.total - 1.0));
}

}  // namespace

Eigen::VectorXd cell_predictor_means(const Thresholds& th, const Eigen::VectorXd& marginals) {
    const auto s = static_cast<Eigen::Index>(th.categories());
    if (marginals.size() != s)
        throw std::invalid_argument("cell_predictor_means: marginals/thresholds mismatch");
    Eigen::VectorXd e_x(s);
    for (Eigen::Index i = 0; i < s; ++i) {
        if (!(marginals(i) > 0.0)) throw degenerate_error("cell_predictor_means: empty category");
        const auto iv = th.interval(static_cast<std::size_t>(i));
        e_x(i) = (gaussian::pdf(iv.lo) - gaussian::pdf(iv.hi)) / marginals(i);
    }
    return e_x;
}

CellMoments cell_moments(double rho, const Thresholds& th, const Eigen::VectorXd& marginals,
                         const Eigen::VectorXd& n) {
    CellMoments m;
    m.e_x = cell_predictor_means(th, marginals);
    m.mu = rho * m.e_x;
    m.sigma2 = cell_response_variance(rho, th, marginals);
    m.n = n;
    return m;
}

Eigen::VectorXd cell_response_variance(double rho, const Thresholds& th,
                                       const Eigen::VectorXd& marginals) {
    const auto s = static_cast<Eigen::Index>(th.categories());
    if (marginals.size() != s)
        throw std::invalid_argument("cell_response_variance: marginals/thresholds mismatch");
    const double r2 = rho * rho;
    Eigen::VectorXd sigma2(s);
    for (Eigen::Index i = 0; i < s; ++i) {
        const auto iv = th.interval(static_cast<std::size_t>(i));
        const double p = marginals(i);
        const double dphi = gaussian::pdf(iv.lo) - gaussian::pdf(iv.hi);
        const double dxphi = gaussian::xpdf(iv.lo) - gaussian::xpdf(iv.hi);
        sigma2(i) = 1.0 + r2 * dxphi / p - r2 * dphi * dphi / (p * p);
        if (!(sigma2(i) > 0.0))
            throw numerical_error("cell_response_variance: nonpositive variance in category " +
                                  std::to_string(i + 1));
    }
    return sigma2;
}

double wls_slope(const Eigen::VectorXd& e_x, const Eigen::VectorXd& e_y,
                 const Eigen::VectorXd& weights) {
    if (e_x.size() != e_y.size() || e_x.size() != weights.size() || e_x.size() < 2)
        throw std::invalid_argument("wls_slope: size mismatch");
    const double denom = (weights.array() * e_x.array().square()).sum();
    if (!(denom > 0.0)) throw degenerate_error("wls_slope: zero denominator");
    return (weights.array() * e_x.array() * e_y.array()).sum() / denom;
}

double polyserial_variance(const Eigen::VectorXd& e_x, const Eigen::VectorXd& sigma2,
                           const Eigen::VectorXd& n) {
    const double denom = (n.array() / sigma2.array() * e_x.array().square()).sum();
    if (!(denom > 0.0)) throw degenerate_error("polyserial_variance: zero denominator");
    return 1.0 / denom;
}

PolyserialFit fit_polyserial(const GroupedSummary& g) {
    const auto s = g.n.size();
    if (s < 2) throw degenerate_error("fit_polyserial: need at least 2 categories");

    Eigen::VectorXd marginals = g.n / g.total;
    Eigen::VectorXd cum(s);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s; ++i) {
        acc += marginals(i);
        cum(i) = acc;
    }
    cum(s - 1) = 1.0;
    const Thresholds th = thresholds_from_marginals(cum);
    const Eigen::VectorXd e_x = cell_predictor_means(th, marginals);

    double rho0 = pearson_from_summary(g);
    if (std::abs(rho0) >= 1.0) rho0 = rho0 > 0.0 ? 0.99 : -0.99;

    PolyserialFit fit;
    fit.trace.emplace_back(0, rho0);

    double rho = rho0;
    Eigen::VectorXd sigma2;
    for (int iter = 1; iter <= kMaxIter; ++iter) {
        sigma2 = cell_response_variance(rho0, th, marginals);
        const Eigen::VectorXd weights = g.n.array() / sigma2.array();
        rho = clamp_rho(wls_slope(e_x, g.ybar, weights));
        fit.iterations = iter;
        fit.trace.emplace_back(iter, rho);
        const double diff = std::abs(rho - rho0);
        rho0 = rho;
        if (diff <= kTol) {
            fit.converged = true;
            break;
        }
    }

    fit.rho = rho;
    sigma2 = cell_response_variance(rho, th, marginals);
    fit.se = std::sqrt(polyserial_variance(e_x, sigma2, g.n));
    return fit;
}

}  // namespace latcor
