#pragma once

// Parametric copula families: distribution function, parameter gradient of
// log C, density, and parameter-space transforms used by the optimizers.
//
// All evaluation is done in the log domain where it matters so that the
// diagnostics can follow C and its log-gradient deep into the lower corner.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "mcde/bvn.hpp"
#include "mcde/error.hpp"
#include "mcde/matrix.hpp"
#include "mcde/normal.hpp"

namespace mcde {

enum class Family { Clayton, Gumbel, Frank, Joe, Gaussian, StudentT, Independence };

inline std::string_view family_name(Family f) {
    switch (f) {
        case Family::Clayton: return "clayton";
        case Family::Gumbel: return "gumbel";
        case Family::Frank: return "frank";
        case Family::Joe: return "joe";
        case Family::Gaussian: return "gaussian";
        case Family::StudentT: return "student_t";
        case Family::Independence: return "independence";
    }
    return "unknown";
}

/// Case-insensitive; also accepts t, studentt, student-t, normal and indep.
inline Family parse_family(std::string_view name) {
    std::string s(name);
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    for (Family f : {Family::Clayton, Family::Gumbel, Family::Frank, Family::Joe,
                     Family::Gaussian, Family::StudentT, Family::Independence}) {
        if (s == family_name(f)) return f;
    }
    if (s == "t" || s == "studentt" || s == "student-t") return Family::StudentT;
    if (s == "normal") return Family::Gaussian;
    if (s == "indep") return Family::Independence;
    throw InputError("unknown copula family '" + std::string(name) + "'");
}

inline bool is_archimedean(Family f) {
    return f == Family::Clayton || f == Family::Gumbel || f == Family::Frank || f == Family::Joe;
}

/// Family tag plus dimension. Student-t carries its (fixed) degrees of freedom.
struct CopulaFamily {
    Family tag = Family::Independence;
    std::size_t dim = 2;
    double dof = 0.0;

    CopulaFamily() = default;
    CopulaFamily(Family t, std::size_t d, double nu = 0.0) : tag(t), dim(d), dof(nu) {
        if (dim < 2) throw InputError("copula dimension must be >= 2");
        if ((tag == Family::Gaussian || tag == Family::StudentT) && dim != 2) {
            throw UnsupportedOperation("elliptical copulas are implemented for d = 2 only");
        }
        if (tag == Family::StudentT && !(dof > 0.0 && std::isfinite(dof))) {
            throw ParameterDomainError("student-t copula requires dof > 0");
        }
    }

    /// Number of estimable parameters.
    std::size_t param_count() const { return tag == Family::Independence ? 0 : 1; }

    friend bool operator==(const CopulaFamily&, const CopulaFamily&) = default;
};

/// Throws ParameterDomainError if theta is outside the family's domain.
inline void validate_params(const CopulaFamily& fam, const ParamVector& theta) {
    if (theta.size() != fam.param_count()) {
        throw ParameterDomainError(std::string(family_name(fam.tag)) + ": expected " +
                                   std::to_string(fam.param_count()) + " parameter(s), got " +
                                   std::to_string(theta.size()));
    }
    if (theta.empty()) return;
    const double t = theta[0];
    auto bad = [&](const char* rule) {
        throw ParameterDomainError(std::string(family_name(fam.tag)) + ": theta = " +
                                   std::to_string(t) + " violates " + rule);
    };
    if (!std::isfinite(t)) bad("finiteness");
    switch (fam.tag) {
        case Family::Clayton:
            if (!(t > 0.0)) bad("theta > 0");
            break;
        case Family::Gumbel:
        case Family::Joe:
            if (!(t >= 1.0)) bad("theta >= 1");
            break;
        case Family::Frank:
            if (t == 0.0) bad("theta != 0");
            if (fam.dim > 2 && t < 0.0) bad("theta > 0 for d > 2");
            break;
        case Family::Gaussian:
        case Family::StudentT:
            if (!(t > -1.0 && t < 1.0)) bad("-1 < theta < 1");
            break;
        case Family::Independence:
            break;
    }
}

/// A copula family with a concrete, validated parameter vector.
class Copula {
public:
    Copula(CopulaFamily fam, ParamVector theta) : family_(fam), theta_(std::move(theta)) {
        validate_params(family_, theta_);
    }

    static Copula clayton(double theta, std::size_t d = 2) {
        return {CopulaFamily(Family::Clayton, d), {theta}};
    }
    static Copula gumbel(double theta, std::size_t d = 2) {
        return {CopulaFamily(Family::Gumbel, d), {theta}};
    }
    static Copula frank(double theta, std::size_t d = 2) {
        return {CopulaFamily(Family::Frank, d), {theta}};
    }
    static Copula joe(double theta, std::size_t d = 2) {
        return {CopulaFamily(Family::Joe, d), {theta}};
    }
    static Copula gaussian(double rho) { return {CopulaFamily(Family::Gaussian, 2), {rho}}; }
    static Copula student_t(double rho, double dof) {
        return {CopulaFamily(Family::StudentT, 2, dof), {rho}};
    }
    static Copula independence(std::size_t d = 2) {
        return {CopulaFamily(Family::Independence, d), {}};
    }

    const CopulaFamily& family() const noexcept { return family_; }
    Family tag() const noexcept { return family_.tag; }
    std::size_t dim() const noexcept { return family_.dim; }
    const ParamVector& params() const noexcept { return theta_; }
    double theta() const { return theta_.at(0); }

    Copula with_params(ParamVector theta) const { return {family_, std::move(theta)}; }

private:
    CopulaFamily family_;
    ParamVector theta_;
};

/// log C(u) together with d/dtheta log C(u).
struct LogCdf {
    double log_value = 0.0;
    ParamVector grad;
};

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Boundary clamp applied before log-gradient evaluation inside estimators.
inline constexpr double kClampLow = 1e-12;

inline double log_sum_exp(const std::vector<double>& a) {
    double m = kNegInf;
    for (double x : a) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : a) s += std::exp(x - m);
    return m + std::log(s);
}

inline void check_point(const Copula& c, Point u) {
    if (u.size() != c.dim()) {
        throw InputError("point has " + std::to_string(u.size()) + " coordinates, copula has d = " +
                         std::to_string(c.dim()));
    }
    for (double x : u) {
        if (std::isnan(x)) throw InputError("NaN coordinate");
        if (x < 0.0 || x > 1.0) throw InputError("coordinate outside [0,1]");
    }
}

// Clayton: C = (sum u_k^{-theta} - d + 1)^{-1/theta}. With a_k = -theta ln u_k,
// S = sum exp(a_k) - (d-1) is evaluated in the log domain.
inline LogCdf clayton_log_cdf(double theta, Point u, bool want_grad) {
    const std::size_t d = u.size();
    std::vector<double> a(d);
    double amax = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        if (u[k] == 0.0) return {kNegInf, {0.0}};
        a[k] = -theta * std::log(u[k]);
        amax = std::max(amax, a[k]);
    }
    double log_s;
    if (amax < 1.0) {
        double s = 0.0;
        for (double x : a) s += std::expm1(x);
        log_s = std::log1p(s);
    } else {
        double s = -static_cast<double>(d - 1) * std::exp(-amax);
        for (double x : a) s += std::exp(x - amax);
        log_s = amax + std::log(s);
    }
    LogCdf out{-log_s / theta, {}};
    if (want_grad) {
        // d/dtheta log S = -sum u_k^{-theta} ln u_k / S
        double dlog_s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            if (u[k] == 1.0) continue;
            dlog_s -= std::exp(a[k] - log_s) * std::log(u[k]);
        }
        out.grad = {log_s / (theta * theta) - dlog_s / theta};
    }
    return out;
}

// Gumbel: log C = -A^{1/theta}, A = sum t_k^theta, t_k = -ln u_k.
inline LogCdf gumbel_log_cdf(double theta, Point u, bool want_grad) {
    std::vector<double> log_t;
    log_t.reserve(u.size());
    for (double x : u) {
        if (x == 0.0) return {kNegInf, {0.0}};
        if (x == 1.0) continue;
        log_t.push_back(std::log(-std::log(x)));
    }
    if (log_t.empty()) return {0.0, {0.0}};
    std::vector<double> terms(log_t.size());
    for (std::size_t k = 0; k < log_t.size(); ++k) terms[k] = theta * log_t[k];
    const double log_a = log_sum_exp(terms);
    const double root = std::exp(log_a / theta);
    LogCdf out{-root, {}};
    if (want_grad) {
        double weighted = 0.0;
        for (std::size_t k = 0; k < log_t.size(); ++k) {
            weighted += std::exp(terms[k] - log_a) * log_t[k];
        }
        out.grad = {-root * (-log_a / (theta * theta) + weighted / theta)};
    }
    return out;
}

// Frank: C = -(1/theta) log1p(q), q = prod E_k / E_1^{d-1}, E_x = expm1(-theta x).
// Coordinates equal to one drop out of the product exactly.
inline LogCdf frank_log_cdf(double theta, Point u, bool want_grad) {
    const double e1 = std::expm1(-theta);
    std::size_t active = 0;
    double log_abs_q = 0.0;
    double dlog_q = 0.0;
    double log_prod_a = 0.0;  // sum log(1 - exp(-theta u_k)), used for theta > 0
    for (double x : u) {
        if (x == 0.0) return {kNegInf, {0.0}};
        if (x == 1.0) continue;
        ++active;
        const double e = std::expm1(-theta * x);
        log_abs_q += std::log(std::fabs(e));
        dlog_q += -x * (e + 1.0) / e;
        log_prod_a += std::log1p(-std::exp(-theta * x));
    }
    if (active == 0) return {0.0, {0.0}};
    const double m = static_cast<double>(active - 1);
    log_abs_q -= m * std::log(std::fabs(e1));
    dlog_q += m * (e1 + 1.0) / e1;
    // sign(q) = sign(-theta)
    const double q = (theta > 0.0 ? -1.0 : 1.0) * std::exp(log_abs_q);
    double l1p;
    if (theta > 0.0 && q < -0.5) {
        // 1 + q = [(1 - c)^m - prod(1 - a_k)] / (1 - c)^m with a_k = exp(-theta u_k), c = exp(-theta)
        const double log_one_minus_c = std::log1p(-std::exp(-theta));
        const double diff = -std::expm1(log_prod_a) + std::expm1(m * log_one_minus_c);
        l1p = std::log(diff) - m * log_one_minus_c;
    } else {
        l1p = std::log1p(q);
    }
    const double value = -l1p / theta;
    LogCdf out{std::log(value), {}};
    if (want_grad) {
        const double ratio = std::fabs(q) < 1e-8 ? 1.0 + 0.5 * q : q / l1p;  // q / log1p(q)
        out.grad = {dlog_q * ratio * std::exp(-l1p) - 1.0 / theta};
    }
    return out;
}

// Joe: C = 1 - (1 - prod A_k)^{1/theta}, A_k = 1 - (1-u_k)^theta.
inline LogCdf joe_log_cdf(double theta, Point u, bool want_grad) {
    double log_p = 0.0;
    double dlog_p = 0.0;
    for (double x : u) {
        if (x == 0.0) return {kNegInf, {0.0}};
        if (x == 1.0) continue;
        const double l = std::log1p(-x);
        const double w = std::exp(theta * l);     // (1-u)^theta
        const double a = -std::expm1(theta * l);  // 1 - w without cancellation
        log_p += w < 0.5 ? std::log1p(-w) : std::log(a);
        dlog_p += -l * w / a;
    }
    if (log_p == 0.0) return {0.0, {0.0}};
    const double p = std::exp(log_p);
    const double big_l = p < 0.5 ? std::log1p(-p) : std::log(-std::expm1(log_p));  // log(1 - p)
    const double s = big_l / theta;
    const double value = -std::expm1(s);
    LogCdf out{std::log(value), {}};
    if (want_grad) {
        const double dl = -p * dlog_p / -std::expm1(log_p);
        const double ds = dl / theta - big_l / (theta * theta);
        // d log C = exp(s) ds / expm1(s)
        out.grad = {std::exp(s) * ds / std::expm1(s)};
    }
    return out;
}

inline LogCdf gaussian_log_cdf(double rho, Point u, bool want_grad) {
    if (u[0] == 0.0 || u[1] == 0.0) return {kNegInf, {0.0}};
    const double x = normal::quantile(u[0]);
    const double y = normal::quantile(u[1]);
    const double p = bvn_cdf(x, y, rho);
    LogCdf out{std::log(p), {}};
    if (want_grad) {
        // Plackett's identity: d Phi_rho(x, y) / d rho = phi_rho(x, y).
        const double dens = (std::isinf(x) || std::isinf(y)) ? 0.0 : bvn_pdf(x, y, rho);
        out.grad = {dens / p};
    }
    return out;
}

inline LogCdf independence_log_cdf(Point u) {
    double s = 0.0;
    for (double x : u) {
        if (x == 0.0) return {kNegInf, {}};
        s += std::log(x);
    }
    return {s, {}};
}

}  // namespace detail

/// Unclamped evaluation of log C(u) and, if requested, its parameter gradient.
/// Returns log_value = -inf when C(u) = 0. Student-t is not supported.
inline LogCdf log_cdf_eval(const Copula& c, Point u, bool want_grad = true) {
    detail::check_point(c, u);
    const double t = c.params().empty() ? 0.0 : c.params()[0];
    switch (c.tag()) {
        case Family::Clayton: return detail::clayton_log_cdf(t, u, want_grad);
        case Family::Gumbel: return detail::gumbel_log_cdf(t, u, want_grad);
        case Family::Frank: return detail::frank_log_cdf(t, u, want_grad);
        case Family::Joe: return detail::joe_log_cdf(t, u, want_grad);
        case Family::Gaussian: return detail::gaussian_log_cdf(t, u, want_grad);
        case Family::Independence: return detail::independence_log_cdf(u);
        case Family::StudentT:
            throw UnsupportedOperation("student-t copula: cdf is not implemented (sampling only)");
    }
    throw UnsupportedOperation("unknown family");
}

/// C_theta(u).
inline double cdf(const Copula& c, Point u) { return std::exp(log_cdf_eval(c, u, false).log_value); }

/// Gradient of log C_theta(u) in theta. Throws BoundaryError where C_theta(u) = 0.
inline ParamVector log_grad_cdf(const Copula& c, Point u) {
    LogCdf e = log_cdf_eval(c, u, true);
    if (e.log_value == detail::kNegInf) {
        throw BoundaryError("log-gradient requested where C(u) = 0");
    }
    return e.grad;
}

/// Evaluation used inside estimators: coordinates are clamped to [1e-12, 1]
/// so that log C is always finite.
inline LogCdf log_cdf_clamped(const Copula& c, Point u, bool want_grad = true) {
    std::vector<double> v(u.begin(), u.end());
    for (double& x : v) x = std::clamp(x, detail::kClampLow, 1.0);
    return log_cdf_eval(c, v, want_grad);
}

// ---------------------------------------------------------------------------
// Densities

namespace detail {

inline double student_t_log_pdf2(double x, double y, double rho, double nu) {
    const double om = (1.0 - rho) * (1.0 + rho);
    const double q = (x * x - 2.0 * rho * x * y + y * y) / (nu * om);
    return std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) -
           std::log(nu * std::numbers::pi) - 0.5 * std::log(om) - 0.5 * (nu + 2.0) * std::log1p(q);
}

inline double student_t_log_pdf1(double x, double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
           0.5 * std::log(nu * std::numbers::pi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

}  // namespace detail

/// log c_theta(u) for u in the open cube. All families are supported at d = 2;
/// Clayton and Independence at any d.
inline double log_pdf(const Copula& c, Point u) {
    detail::check_point(c, u);
    for (double x : u) {
        if (x <= 0.0 || x >= 1.0) throw InputError("density requires u in the open unit cube");
    }
    const std::size_t d = c.dim();
    const double t = c.params().empty() ? 0.0 : c.params()[0];
    if (c.tag() == Family::Independence) return 0.0;
    if (c.tag() == Family::Clayton) {
        double sum_log_u = 0.0;
        for (double x : u) sum_log_u += std::log(x);
        const double log_s = -t * detail::clayton_log_cdf(t, u, false).log_value;
        double out = -(t + 1.0) * sum_log_u - (1.0 / t + static_cast<double>(d)) * log_s;
        for (std::size_t k = 1; k < d; ++k) out += std::log1p(static_cast<double>(k) * t);
        return out;
    }
    if (d != 2) {
        throw UnsupportedOperation(std::string(family_name(c.tag())) +
                                   ": density implemented for d = 2 only");
    }
    const double uu = u[0];
    const double vv = u[1];
    switch (c.tag()) {
        case Family::Gumbel: {
            const double x = -std::log(uu);
            const double y = -std::log(vv);
            const double lx = std::log(x);
            const double ly = std::log(y);
            const double log_a = detail::log_sum_exp({t * lx, t * ly});
            const double root = std::exp(log_a / t);
            return -root + x + y + (t - 1.0) * (lx + ly) + (-2.0 + 1.0 / t) * log_a +
                   std::log(root + t - 1.0);
        }
        case Family::Frank: {
            const double e1 = std::expm1(-t);
            const double eu = std::expm1(-t * uu);
            const double ev = std::expm1(-t * vv);
            const double den = e1 + eu * ev;
            return std::log(-t * e1) - t * (uu + vv) - 2.0 * std::log(std::fabs(den));
        }
        case Family::Joe: {
            const double lu = std::log1p(-uu);
            const double lv = std::log1p(-vv);
            const double x = std::exp(t * lu);  // (1-u)^t
            const double y = std::exp(t * lv);
            const double br = x + y * (1.0 - x);  // x + y - xy
            return (1.0 / t - 2.0) * std::log(br) + (t - 1.0) * (lu + lv) + std::log(t - 1.0 + br);
        }
        case Family::Gaussian: {
            const double x = normal::quantile(uu);
            const double y = normal::quantile(vv);
            const double om = (1.0 - t) * (1.0 + t);
            return -0.5 * std::log(om) - (t * t * (x * x + y * y) - 2.0 * t * x * y) / (2.0 * om);
        }
        case Family::StudentT: {
            const double nu = c.family().dof;
            const boost::math::students_t dist(nu);
            const double x = boost::math::quantile(dist, uu);
            const double y = boost::math::quantile(dist, vv);
            return detail::student_t_log_pdf2(x, y, t, nu) - detail::student_t_log_pdf1(x, nu) -
                   detail::student_t_log_pdf1(y, nu);
        }
        default:
            break;
    }
    throw UnsupportedOperation("density not implemented for this family");
}

/// Whether log_pdf is implemented for this (family, dimension).
inline bool has_density(const CopulaFamily& fam) {
    return fam.tag == Family::Clayton || fam.tag == Family::Independence || fam.dim == 2;
}

inline double pdf(const Copula& c, Point u) { return std::exp(log_pdf(c, u)); }

// ---------------------------------------------------------------------------
// Unconstrained parameterization for the optimizers.

/// Maps theta to an unconstrained coordinate: log(theta) for Clayton,
/// log(theta - 1) for Gumbel/Joe, identity for Frank, atanh for Gaussian.
inline double to_internal(Family f, double theta) {
    switch (f) {
        case Family::Clayton: return std::log(theta);
        case Family::Gumbel:
        case Family::Joe: return std::log(theta - 1.0);
        case Family::Gaussian:
        case Family::StudentT: return std::atanh(theta);
        default: return theta;
    }
}

inline double from_internal(Family f, double x) {
    switch (f) {
        case Family::Clayton: return std::exp(x);
        case Family::Gumbel:
        case Family::Joe: return 1.0 + std::exp(x);
        case Family::Gaussian:
        case Family::StudentT: return std::tanh(x);
        default: return x;
    }
}

/// d theta / d x at internal coordinate x.
inline double internal_jacobian(Family f, double x) {
    switch (f) {
        case Family::Clayton:
        case Family::Gumbel:
        case Family::Joe: return std::exp(x);
        case Family::Gaussian:
        case Family::StudentT: {
            const double th = std::tanh(x);
            return 1.0 - th * th;
        }
        default: return 1.0;
    }
}

}  // namespace mcde
