#pragma once

// Minimum copula divergence estimation, the rank-based pseudo-MLE, and the
// sandwich covariance A^{-1} B A^{-1} of the power MCDEs.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcde/copula.hpp"
#include "mcde/dependence.hpp"
#include "mcde/divergence.hpp"
#include "mcde/empirical.hpp"
#include "mcde/optimize.hpp"
#include "mcde/sampling.hpp"

namespace mcde {

struct FitOptions {
    double tol = 1e-8;               // requested tolerance in internal coordinates
    std::size_t max_iter = 200;
    double bracket_cap = 30.0;       // |internal coordinate| limit during bracketing
    double initial_step = 0.5;
    std::optional<ParamVector> start;  // overrides the rank-correlation warm start
};

struct FitResult {
    ParamVector theta_hat;
    double loss_at_opt = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    std::string method;  // "MCDE(beta(0.1))" or "PseudoMLE"
};

namespace detail {

inline void check_fit_input(const PseudoSample& u, const CopulaFamily& fam) {
    if (u.d() != fam.dim) {
        throw InputError("sample dimension " + std::to_string(u.d()) + " does not match family dimension " +
                         std::to_string(fam.dim));
    }
    if (u.n() < fam.dim + 1) throw InputError("need n >= d + 1 observations to fit");
    if (u.has_degenerate_column()) throw InputError("degenerate sample: a column is constant");
    if (fam.param_count() == 0) throw UsageError("family has no free parameters to estimate");
    if (fam.tag == Family::StudentT) {
        throw UnsupportedOperation("student-t copula cannot be fitted (no cdf)");
    }
}

/// Rank-correlation warm start: Kendall's tau inversion for Archimedean
/// families, Spearman's rho for the Gaussian.
inline double initial_theta(const PseudoSample& u, const CopulaFamily& fam) {
    if (fam.tag == Family::Gaussian) {
        const double rs = spearman_rho(u.matrix().column(0), u.matrix().column(1));
        return 2.0 * std::sin(std::numbers::pi * std::clamp(rs, -0.95, 0.95) / 6.0);
    }
    const double tau = mean_pairwise_tau(u.matrix());
    double t = theta_from_tau(fam.tag, tau);
    if (fam.tag == Family::Frank && fam.dim > 2) t = std::max(t, 1e-3);
    return t;
}

inline double family_cap(Family f, double cap) {
    // tanh saturates to exactly 1.0 in double precision near 19
    if (f == Family::Gaussian) return std::min(cap, 15.0);
    return cap;
}

/// theta from an internal coordinate, nudged away from Frank's removable
/// singularity at 0.
inline double theta_at(const CopulaFamily& fam, double x) {
    double t = from_internal(fam.tag, x);
    if (fam.tag == Family::Frank) {
        if (fam.dim > 2) t = std::max(t, 1e-9);
        if (std::fabs(t) < 1e-9) t = t < 0 ? -1e-9 : 1e-9;
    }
    return t;
}

template <class Objective>
FitResult minimize_scalar(const CopulaFamily& fam, const Objective& objective, double theta0,
                          const FitOptions& opts) {
    const double cap = family_cap(fam.tag, opts.bracket_cap);
    std::function<double(double)> f = [&](double x) { return objective(theta_at(fam, x)); };
    const double x0 = std::clamp(to_internal(fam.tag, theta0), -cap, cap);
    const optim::Bracket br = optim::bracket_minimum(f, x0, opts.initial_step, cap);
    const optim::ScalarResult r = optim::brent_minimize(f, br.lo, br.hi, opts.max_iter);
    FitResult out;
    out.theta_hat = {theta_at(fam, r.x)};
    out.loss_at_opt = r.fx;
    out.iterations = r.iterations + br.evaluations;
    out.converged = r.converged;
    return out;
}

}  // namespace detail

/// MCDE with precomputed empirical-copula values `chat` = C_hat(U_i).
inline FitResult fit_mcde(const PseudoSample& u, const std::vector<double>& chat, const CopulaFamily& fam,
                          const DivergenceSpec& spec, const FitOptions& opts = {}) {
    detail::check_fit_input(u, fam);
    if (chat.size() != u.n()) throw InputError("fit_mcde: chat size mismatch");
    auto objective = [&](double theta) {
        const Copula c(fam, {theta});
        return loss_from_values(spec, evaluate_model(c, u, false).c, chat);
    };
    const double theta0 = opts.start ? opts.start->at(0) : detail::initial_theta(u, fam);

    FitResult out;
    if (fam.param_count() == 1) {
        out = detail::minimize_scalar(fam, objective, theta0, opts);
    } else {
        // Multi-parameter path (internal coordinates, exact loss gradient).
        auto to_theta = [&](const std::vector<double>& x) {
            ParamVector t(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) t[k] = from_internal(fam.tag, x[k]);
            return t;
        };
        auto f = [&](const std::vector<double>& x) {
            return loss_from_values(spec, evaluate_model(Copula(fam, to_theta(x)), u, false).c, chat);
        };
        auto g = [&](const std::vector<double>& x) {
            ParamVector gt = loss_gradient(spec, u, chat, Copula(fam, to_theta(x)));
            for (std::size_t k = 0; k < x.size(); ++k) gt[k] *= internal_jacobian(fam.tag, x[k]);
            return gt;
        };
        std::vector<double> x0(opts.start ? opts.start->size() : fam.param_count());
        for (std::size_t k = 0; k < x0.size(); ++k) x0[k] = to_internal(fam.tag, opts.start ? (*opts.start)[k] : theta0);
        const optim::VectorResult r = optim::gradient_descent(f, g, x0, opts.tol, opts.max_iter);
        out.theta_hat = to_theta(r.x);
        out.loss_at_opt = r.fx;
        out.iterations = r.iterations;
        out.converged = r.converged;
    }
    const Copula fitted(fam, out.theta_hat);
    const ParamVector grad = loss_gradient(spec, u, chat, fitted);
    double gn = 0.0;
    for (double x : grad) gn += x * x;
    out.gradient_norm = std::sqrt(gn);
    out.method = "MCDE(" + spec.name() + ")";
    return out;
}

/// Minimum copula divergence estimate: argmin over theta of L_spec(theta).
inline FitResult fit_mcde(const PseudoSample& u, const CopulaFamily& fam, const DivergenceSpec& spec,
                          const FitOptions& opts = {}) {
    detail::check_fit_input(u, fam);
    return fit_mcde(u, EmpiricalCopula(u).eval_at_sample(), fam, spec, opts);
}

/// Negative pseudo-log-likelihood -sum log c_theta(U_i).
inline double negative_log_likelihood(const PseudoSample& u, const Copula& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.n(); ++i) s -= log_pdf(c, u.row(i));
    return s;
}

/// Semiparametric (pseudo-) maximum likelihood estimate.
inline FitResult fit_mle(const PseudoSample& u, const CopulaFamily& fam, const FitOptions& opts = {}) {
    detail::check_fit_input(u, fam);
    if (!has_density(fam)) {
        throw UnsupportedOperation(std::string(family_name(fam.tag)) + ": density not implemented for d = " +
                                   std::to_string(fam.dim));
    }
    auto objective = [&](double theta) { return negative_log_likelihood(u, Copula(fam, {theta})); };
    const double theta0 = opts.start ? opts.start->at(0) : detail::initial_theta(u, fam);
    FitResult out = detail::minimize_scalar(fam, objective, theta0, opts);
    const double t = out.theta_hat[0];
    double h = 1e-6 * std::max(1.0, std::fabs(t));
    double lo = t - h, hi = t + h;
    // one-sided difference on a closed domain edge
    const bool edge = (fam.tag == Family::Gumbel || fam.tag == Family::Joe) && lo < 1.0;
    if (edge) lo = t;
    if (fam.tag == Family::Clayton && lo <= 0.0) lo = t;
    out.gradient_norm = std::fabs((objective(hi) - objective(lo)) / (hi - lo));
    out.method = "PseudoMLE";
    return out;
}

// ---------------------------------------------------------------------------
// Asymptotic covariance

struct CovarianceReport {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd Sigma;
    double x_exponent = 0.0;
    std::size_t mc_samples = 0;
    Eigen::MatrixXd B_std_error;  // Monte Carlo standard error of each entry of B
    double condition_number = 0.0;
};

inline constexpr std::size_t kDefaultCovarianceMc = 20000;

/// Sandwich covariance Sigma_x = A_x^{-1} B_x A_x^{-1} of sqrt(n)(theta_hat - theta)
/// for the power MCDE with exponent x (x = 0 covers every alpha-MCDE):
///   A_x = E[C(U)^{x+1} g(U) g(U)^T],
///   B_x = E[C(U)^x C(V)^x (C(U ^ V) - C(U) C(V)) g(U) g(V)^T],
/// with U, V independent draws from c and g = grad log C. A uses `mc` draws;
/// B is streamed over `mc` independent (U, V) pairs.
inline CovarianceReport asymptotic_covariance(const Copula& c, double x, std::size_t mc = kDefaultCovarianceMc,
                                              std::uint64_t seed = 1) {
    const std::size_t m = c.family().param_count();
    if (m == 0) throw UsageError("asymptotic_covariance: family has no parameters");
    if (mc < 2) throw InputError("asymptotic_covariance: need mc >= 2");
    Rng rng_u(derive_seed(seed, 0));
    Rng rng_v(derive_seed(seed, 1));
    const std::size_t d = c.dim();
    std::vector<double> u(d), v(d), w(d);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd B2 = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < mc; ++i) {
        sample_row(c, rng_u, u);
        sample_row(c, rng_v, v);
        for (std::size_t k = 0; k < d; ++k) w[k] = std::min(u[k], v[k]);
        const LogCdf eu = log_cdf_clamped(c, u, true);
        const LogCdf ev = log_cdf_clamped(c, v, true);
        const double cu = std::exp(eu.log_value);
        const double cv = std::exp(ev.log_value);
        const double cw = std::exp(log_cdf_clamped(c, w, false).log_value);
        const Eigen::Map<const Eigen::VectorXd> gu(eu.grad.data(), static_cast<Eigen::Index>(m));
        const Eigen::Map<const Eigen::VectorXd> gv(ev.grad.data(), static_cast<Eigen::Index>(m));
        A += std::pow(cu, x + 1.0) * gu * gu.transpose();
        const Eigen::MatrixXd term = std::pow(cu, x) * std::pow(cv, x) * (cw - cu * cv) * gu * gv.transpose();
        B += term;
        B2 += term.cwiseProduct(term);
    }
    const double n = static_cast<double>(mc);
    A /= n;
    B /= n;
    B2 /= n;
    CovarianceReport rep;
    rep.x_exponent = x;
    rep.mc_samples = mc;
    rep.B_std_error = ((B2 - B.cwiseProduct(B)) / (n - 1.0)).cwiseMax(0.0).cwiseSqrt();
    rep.A = 0.5 * (A + A.transpose());
    rep.B = 0.5 * (B + B.transpose());

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rep.A);
    const auto& s = svd.singularValues();
    rep.condition_number = s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : INFINITY;
    if (!(rep.condition_number < 1e12)) {
        throw NumericalError("asymptotic_covariance: A is singular (condition number " +
                             std::to_string(rep.condition_number) + ")");
    }
    const Eigen::MatrixXd a_inv = rep.A.inverse();
    rep.Sigma = a_inv * rep.B * a_inv;
    rep.Sigma = 0.5 * (rep.Sigma + rep.Sigma.transpose());
    return rep;
}

}  // namespace mcde
