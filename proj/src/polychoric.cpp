#include "latcor/polychoric.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "latcor/errors.hpp"
#include "latcor/gaussian.hpp"

namespace latcor {

namespace {

constexpr double kRhoBound = 1.0 - 1e-9;
constexpr double kTol = 1e-8;
constexpr int kMaxIter = 100;

double clamp_rho(double rho) { return std::min(std::max(rho, -kRhoBound), kRhoBound); }

// Conditional means E(Z | t_{j-1} < Z <= t_j) of N(rho*center, 1-rho^2)
// for every category of th at once.  Boundary pdf/CDF values are computed
// once and shared by the two cells that touch them; masses come from
// whichever tail avoids cancellation, as in truncated_mean.
void conditional_means_along(double rho, double center, const Thresholds& th,
                             const char* axis, std::vector<double>& out) {
    const double scale = std::sqrt(1.0 - rho * rho);
    const double mu = rho * center;
    const std::size_t m = th.categories();
    out.resize(m);

    double pdf_lo = 0.0;            // pdf at the lower boundary of the cell
    double tail_lo = 0.0;           // cdf or upper-tail value at that boundary
    bool lower_positive = false;    // boundary at or right of zero
    for (std::size_t j = 0; j < m; ++j) {
        double pdf_hi, cdf_hi, tail_hi;
        bool upper_positive;
        if (j + 1 == m) {
            pdf_hi = 0.0;
            cdf_hi = 1.0;
            tail_hi = 0.0;
            upper_positive = true;
        } else {
            const double u = (th.cuts[j] - mu) / scale;
            pdf_hi = gaussian::pdf(u);
            upper_positive = u >= 0.0;
            tail_hi = upper_positive ? gaussian::cdf_upper(u) : gaussian::cdf(u);
            cdf_hi = upper_positive ? 1.0 - tail_hi : tail_hi;
        }
        // lower boundary of cell 0 is -inf: pdf 0, cdf 0
        const double mass = lower_positive ? tail_lo - tail_hi
                                           : cdf_hi - (j == 0 ? 0.0 : tail_lo);
        if (!(mass >= 1e-300))
            throw degenerate_error(std::string("conditional cell mass underflows along ") +
                                   axis + " at category " + std::to_string(j + 1));
        out[j] = mu + scale * (pdf_lo - pdf_hi) / mass;
        pdf_lo = pdf_hi;
        tail_lo = upper_positive ? tail_hi : cdf_hi;
        lower_positive = upper_positive;
    }
}

// Pearson correlation of the integer category codes weighted by the cell
// proportions; identical to the sample Pearson of the coded data.
double pearson_from_table(const ProportionTable& p) {
    double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) mx += p.row_marginal(i) * (i + 1.0);
    for (Eigen::Index j = 0; j < p.cols(); ++j) my += p.col_marginal(j) * (j + 1.0);
    for (Eigen::Index i = 0; i < p.rows(); ++i) sxx += p.row_marginal(i) * (i + 1.0 - mx) * (i + 1.0 - mx);
    for (Eigen::Index j = 0; j < p.cols(); ++j) syy += p.col_marginal(j) * (j + 1.0 - my) * (j + 1.0 - my);
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j)
            sxy += p.cell(i, j) * (i + 1.0 - mx) * (j + 1.0 - my);
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw degenerate_error("polychoric: degenerate marginal distribution");
    return sxy / std::sqrt(sxx * syy);
}

PolychoricFit fit_impl(const ProportionTable& p, double n, JacobianKind kind) {
    if (kind != JacobianKind::block_diagonal && (p.rows() != 2 || p.cols() != 2))
        throw std::invalid_argument("tetrachoric Jacobian requires a 2x2 table");

    const Thresholds th_a = thresholds_from_marginals(p.cum_row);
    const Thresholds th_b = thresholds_from_marginals(p.cum_col);

    double rho0 = clamp_rho(pearson_from_table(p));

    IterationState state;
    state.e_x = initial_predictors(th_a, p.row_marginal);

    PolychoricFit fit;
    WlsEstimate est{rho0, 0.0};
    for (int iter = 1; iter <= kMaxIter; ++iter) {
        Eigen::VectorXd e_x_entering = state.e_x;
        est = polychoric_step(state, rho0, p, n, th_a, th_b, kind);
        fit.iterations = iter;
        fit.trace.push_back({iter, std::move(e_x_entering), state.e_y, est.rho});
        const double diff = std::abs(est.rho - rho0);
        rho0 = est.rho;
        if (diff <= kTol) {
            fit.converged = true;
            break;
        }
    }
    fit.rho = rho0;
    fit.se = std::sqrt(est.variance);
    return fit;
}

}  // namespace

Eigen::VectorXd initial_predictors(const Thresholds& th_a, const Eigen::VectorXd& row_marginal) {
    const auto s = static_cast<Eigen::Index>(th_a.categories());
    if (row_marginal.size() != s)
        throw std::invalid_argument("initial_predictors: marginals/thresholds mismatch");
    Eigen::VectorXd e_x(s);
    for (Eigen::Index i = 0; i < s; ++i) {
        if (!(row_marginal(i) > 0.0))
            throw degenerate_error("initial_predictors: empty row category");
        const auto iv = th_a.interval(static_cast<std::size_t>(i));
        e_x(i) = (gaussian::pdf(iv.lo) - gaussian::pdf(iv.hi)) / row_marginal(i);
    }
    return e_x;
}

Eigen::MatrixXd conditional_cell_means(double rho, const Eigen::VectorXd& e_x,
                                       const Thresholds& th_b) {
    if (!(std::abs(rho) < 1.0))
        throw std::domain_error("conditional_cell_means: |rho| must be < 1");
    const auto s = e_x.size();
    const auto r = static_cast<Eigen::Index>(th_b.categories());
    Eigen::MatrixXd e_cell(s, r);
    std::vector<double> row;
    for (Eigen::Index i = 0; i < s; ++i) {
        conditional_means_along(rho, e_x(i), th_b, "columns", row);
        for (Eigen::Index j = 0; j < r; ++j) e_cell(i, j) = row[static_cast<std::size_t>(j)];
    }
    return e_cell;
}

Eigen::VectorXd response_means(const ProportionTable& p, const Eigen::MatrixXd& e_cell) {
    if (p.rows() != e_cell.rows() || p.cols() != e_cell.cols())
        throw std::invalid_argument("response_means: shape mismatch");
    Eigen::VectorXd e_y(p.rows());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        if (!(p.row_marginal(i) > 0.0)) throw degenerate_error("response_means: zero row mass");
        e_y(i) = (p.cell.row(i).array() * e_cell.row(i).array()).sum() / p.row_marginal(i);
    }
    return e_y;
}

Eigen::MatrixXd jacobian_general(const ProportionTable& p, const Eigen::MatrixXd& e_cell) {
    const auto s = p.rows();
    const auto r = p.cols();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(s, s * r);
    for (Eigen::Index k = 0; k < s; ++k) {
        const double pk = p.row_marginal(k);
        const double weighted = (p.cell.row(k).array() * e_cell.row(k).array()).sum();
        for (Eigen::Index j = 0; j < r; ++j) {
            // ((P_k. - P_kj) e_kj - sum_{m != j} P_km e_km) / P_k.^2
            d(k, k * r + j) =
                (pk * e_cell(k, j) - weighted) / (pk * pk);
        }
    }
    return d;
}

Eigen::MatrixXd jacobian_2x2(const ProportionTable& p, const Eigen::MatrixXd& e_cell,
                             const Eigen::VectorXd& e_x, double rho, double b_cut,
                             JacobianKind parts) {
    if (p.rows() != 2 || p.cols() != 2)
        throw std::invalid_argument("jacobian_2x2: table must be 2x2");

    Eigen::MatrixXd d = jacobian_general(p, e_cell);  // the weight part D1
    if (parts == JacobianKind::tetrachoric_d1) return d;

    // Threshold part D2: b = quantile(P_.1) moves with P_11 and P_21;
    // de_i1/dP_11 = de_i1/dP_21 via the chain rule through b.
    const double phi_b = gaussian::pdf(b_cut);
    for (Eigen::Index i = 0; i < 2; ++i) {
        const double u = gaussian::residual_threshold(b_cut, e_x(i), rho);
        const double phi_u = gaussian::pdf(u);
        const double cdf_u = gaussian::cdf(u);
        const double surv_u = 1.0 - cdf_u;
        const double de1 = phi_u * (u * cdf_u + phi_u) / (cdf_u * cdf_u * phi_b);
        const double de2 = phi_u * (-u * surv_u + phi_u) / (surv_u * surv_u * phi_b);
        const double pi1 = p.cell(i, 0) / p.row_marginal(i);
        const double pi2 = p.cell(i, 1) / p.row_marginal(i);
        const double entry = pi1 * de1 + pi2 * de2;
        d(i, 0) += entry;  // dE_Y_i / dP_11
        d(i, 2) += entry;  // dE_Y_i / dP_21
    }
    return d;
}

Eigen::MatrixXd response_covariance(const Eigen::MatrixXd& d, const ProportionCovariance& b) {
    if (d.cols() != b.b.rows())
        throw std::invalid_argument("response_covariance: shape mismatch");
    Eigen::MatrixXd sigma = d * b.b * d.transpose();
    return 0.5 * (sigma + sigma.transpose());
}

WlsEstimate weighted_estimate(const Eigen::VectorXd& e_x, const Eigen::VectorXd& e_y,
                              const Eigen::MatrixXd& sigma) {
    if (e_x.size() != e_y.size() || sigma.rows() != e_x.size() || sigma.cols() != e_x.size())
        throw std::invalid_argument("weighted_estimate: shape mismatch");

    // A (near-)zero diagonal entry means that category's response mean has
    // no sampling variance under the delta method -- its observations sit
    // in a single cell -- and the weighted solve would pin the line
    // through it.  No ridge makes that row informative; treat as singular.
    const double trace = sigma.trace();
    if (!(trace > 0.0) ||
        sigma.diagonal().minCoeff() <= 1e-10 * trace / static_cast<double>(sigma.rows()))
        throw numerical_error(
            "weighted_estimate: singular response covariance (zero-variance category)");

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd ridged = sigma;
        const double ridge = 1e-12 * sigma.trace() / static_cast<double>(sigma.rows());
        ridged.diagonal().array() += ridge;
        llt.compute(ridged);
        if (llt.info() != Eigen::Success)
            throw numerical_error("weighted_estimate: singular response covariance");
    }
    const Eigen::VectorXd solved = llt.solve(e_x);
    const double denom = e_x.dot(solved);
    if (!(denom > 0.0)) throw numerical_error("weighted_estimate: nonpositive normal equation");
    WlsEstimate est;
    est.variance = 1.0 / denom;
    est.rho = est.variance * solved.dot(e_y);
    return est;
}

Eigen::VectorXd update_predictors(double rho, const ProportionTable& p,
                                  const Eigen::MatrixXd& e_cell, const Thresholds& th_a) {
    if (!(std::abs(rho) < 1.0))
        throw std::domain_error("update_predictors: |rho| must be < 1");
    const auto s = p.rows();
    const auto r = p.cols();

    Eigen::VectorXd e_yx(r);
    for (Eigen::Index j = 0; j < r; ++j) {
        if (!(p.col_marginal(j) > 0.0))
            throw degenerate_error("update_predictors: zero column mass");
        e_yx(j) = (p.cell.col(j).array() * e_cell.col(j).array()).sum() / p.col_marginal(j);
    }

    Eigen::VectorXd e_x = Eigen::VectorXd::Zero(s);
    std::vector<double> col;
    for (Eigen::Index j = 0; j < r; ++j) {
        conditional_means_along(rho, e_yx(j), th_a, "rows", col);
        for (Eigen::Index i = 0; i < s; ++i)
            e_x(i) += p.cell(i, j) * col[static_cast<std::size_t>(i)];
    }
    e_x.array() /= p.row_marginal.array();
    return e_x;
}

WlsEstimate polychoric_step(IterationState& state, double rho_old, const ProportionTable& p,
                            double n, const Thresholds& th_a, const Thresholds& th_b,
                            JacobianKind kind) {
    state.e_cell = conditional_cell_means(rho_old, state.e_x, th_b);
    if (kind == JacobianKind::block_diagonal) {
        // Sigma = D B D' with block-diagonal D and multinomial B reduces
        // to (diag(v) - w w')/n; no need to materialize either factor.
        const auto s = p.rows();
        Eigen::VectorXd v(s), w(s);
        for (Eigen::Index k = 0; k < s; ++k) {
            const double pk = p.row_marginal(k);
            const double weighted = (p.cell.row(k).array() * state.e_cell.row(k).array()).sum();
            double vk = 0.0, wk = 0.0;
            for (Eigen::Index j = 0; j < p.cols(); ++j) {
                const double d = (pk * state.e_cell(k, j) - weighted) / (pk * pk);
                vk += d * d * p.cell(k, j);
                wk += d * p.cell(k, j);
            }
            v(k) = vk;
            w(k) = wk;
        }
        state.sigma = (Eigen::MatrixXd(v.asDiagonal()) - w * w.transpose()) / n;
    } else {
        const Eigen::MatrixXd d =
            jacobian_2x2(p, state.e_cell, state.e_x, rho_old, th_b.cuts.front(), kind);
        state.sigma = response_covariance(d, proportion_covariance(p, n));
    }
    state.e_y = response_means(p, state.e_cell);

    WlsEstimate est = weighted_estimate(state.e_x, state.e_y, state.sigma);
    est.rho = clamp_rho(est.rho);
    state.e_x = update_predictors(est.rho, p, state.e_cell, th_a);
    return est;
}

PolychoricFit fit_polychoric(const ProportionTable& p, double n) {
    return fit_impl(p, n, JacobianKind::block_diagonal);
}

PolychoricFit fit_polychoric(const ContingencyTable& t) {
    return fit_polychoric(proportions(t), t.n);
}

PolychoricFit fit_tetrachoric(const ProportionTable& p, double n, JacobianKind parts) {
    return fit_impl(p, n, parts);
}

PolychoricFit fit_tetrachoric(const ContingencyTable& t, JacobianKind parts) {
    return fit_tetrachoric(proportions(t), t.n, parts);
}

}  // namespace latcor
