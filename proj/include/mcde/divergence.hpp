#pragma once

// Power copula divergences (alpha, beta, gamma): the sample losses built on the
// empirical copula, their estimating functions, and divergence evaluation
// between two copulas.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcde/copula.hpp"
#include "mcde/empirical.hpp"
#include "mcde/sampling.hpp"

namespace mcde {

enum class DivergenceKind { Alpha, Beta, Gamma };

inline std::string_view kind_name(DivergenceKind k) {
    switch (k) {
        case DivergenceKind::Alpha: return "alpha";
        case DivergenceKind::Beta: return "beta";
        case DivergenceKind::Gamma: return "gamma";
    }
    return "unknown";
}

inline DivergenceKind parse_kind(std::string_view s) {
    if (s == "alpha") return DivergenceKind::Alpha;
    if (s == "beta") return DivergenceKind::Beta;
    if (s == "gamma") return DivergenceKind::Gamma;
    throw InputError("unknown divergence kind '" + std::string(s) + "'");
}

struct DivergenceSpec {
    DivergenceKind kind = DivergenceKind::Beta;
    double exponent = 0.1;

    DivergenceSpec() = default;
    DivergenceSpec(DivergenceKind k, double e) : kind(k), exponent(e) {
        if (!std::isfinite(e)) throw InputError("divergence exponent must be finite");
        switch (k) {
            case DivergenceKind::Alpha:
                if (e == 0.0 || e == 1.0) throw InputError("alpha exponent must differ from 0 and 1");
                break;
            case DivergenceKind::Beta:
                if (!(e > -1.0) || e == 0.0) throw InputError("beta exponent must be > -1 and != 0");
                break;
            case DivergenceKind::Gamma:
                if (!(e > -1.0) || e == 0.0) throw InputError("gamma exponent must be > -1 and != 0");
                break;
        }
    }

    static DivergenceSpec alpha(double a) { return {DivergenceKind::Alpha, a}; }
    static DivergenceSpec beta(double b) { return {DivergenceKind::Beta, b}; }
    static DivergenceSpec gamma(double g) { return {DivergenceKind::Gamma, g}; }

    /// Exponent range in which the estimating function is uniformly bounded
    /// for power-bounded models: alpha in (0,1), beta > 0, gamma > 0.
    bool robust() const {
        return kind == DivergenceKind::Alpha ? (exponent > 0.0 && exponent < 1.0) : exponent > 0.0;
    }

    std::string name() const {
        std::ostringstream os;
        os << kind_name(kind) << "(" << exponent << ")";
        return os.str();
    }

    friend bool operator==(const DivergenceSpec&, const DivergenceSpec&) = default;
};

struct LossValue {
    double value = 0.0;
    std::size_t n = 0;
};

/// Model copula values and log-gradients at each pseudo-observation
/// (coordinates clamped to [1e-12, 1]).
struct ModelEval {
    std::vector<double> c;
    std::vector<ParamVector> grad;
};

inline ModelEval evaluate_model(const Copula& c, const PseudoSample& u, bool want_grad) {
    ModelEval out;
    out.c.resize(u.n());
    if (want_grad) out.grad.resize(u.n());
    for (std::size_t i = 0; i < u.n(); ++i) {
        LogCdf e = log_cdf_clamped(c, u.row(i), want_grad);
        out.c[i] = std::exp(e.log_value);
        if (want_grad) out.grad[i] = std::move(e.grad);
    }
    return out;
}

namespace detail {

inline void check_terms(std::size_t n_model, std::size_t n_chat) {
    if (n_model != n_chat) throw InputError("loss: empirical copula values do not match the sample size");
}

inline void check_positive(const std::vector<double>& c, double power) {
    if (power >= 0.0) return;
    for (double x : c) {
        if (x <= 0.0) throw BoundaryError("C(U_i) = 0 with a negative power");
    }
}

}  // namespace detail

/// Sample loss from model values `model_c` and empirical values `chat`,
/// exactly as displayed (no 1/n normalization).
inline double loss_from_values(const DivergenceSpec& spec, const std::vector<double>& model_c,
                               const std::vector<double>& chat) {
    detail::check_terms(model_c.size(), chat.size());
    const double e = spec.exponent;
    const std::size_t n = model_c.size();
    switch (spec.kind) {
        case DivergenceKind::Alpha: {
            detail::check_positive(model_c, e);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += -std::pow(model_c[i], e) * std::pow(chat[i], 1.0 - e) + e * model_c[i];
            }
            return s / (e * (1.0 - e));
        }
        case DivergenceKind::Beta: {
            detail::check_positive(model_c, e);
            double cross = 0.0, diag = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double cp = std::pow(model_c[i], e);
                cross += chat[i] * cp;
                diag += cp * model_c[i];
            }
            return -cross / e + diag / (e + 1.0);
        }
        case DivergenceKind::Gamma: {
            detail::check_positive(model_c, e);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double cp = std::pow(model_c[i], e);
                num += chat[i] * cp;
                den += cp * model_c[i];
            }
            if (den <= 0.0) throw BoundaryError("gamma loss: zero denominator");
            return -num / (e * std::pow(den, e / (e + 1.0)));
        }
    }
    return 0.0;
}

/// L(theta) for the pseudo-sample `u` with precomputed C_hat(U_i) values.
inline LossValue loss(const DivergenceSpec& spec, const PseudoSample& u, const std::vector<double>& chat,
                      const Copula& c) {
    const ModelEval m = evaluate_model(c, u, false);
    return {loss_from_values(spec, m.c, chat), u.n()};
}

inline LossValue loss(const DivergenceSpec& spec, const PseudoSample& u, const Copula& c) {
    return loss(spec, u, EmpiricalCopula(u).eval_at_sample(), c);
}

/// w_hat = sum C_hat C^gamma / sum C^{gamma+1}.
inline double gamma_weight_from_values(const std::vector<double>& model_c, const std::vector<double>& chat,
                                       double gamma) {
    if (!(gamma > -1.0)) throw InputError("gamma_weight: gamma must be > -1");
    detail::check_terms(model_c.size(), chat.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < model_c.size(); ++i) {
        const double cp = std::pow(model_c[i], gamma);
        num += chat[i] * cp;
        den += cp * model_c[i];
    }
    if (den <= 0.0) throw BoundaryError("gamma_weight: zero denominator");
    return num / den;
}

inline double gamma_weight(const PseudoSample& u, const std::vector<double>& chat, const Copula& c,
                           double gamma) {
    return gamma_weight_from_values(evaluate_model(c, u, false).c, chat, gamma);
}

inline double gamma_weight(const PseudoSample& u, const Copula& c, double gamma) {
    return gamma_weight(u, EmpiricalCopula(u).eval_at_sample(), c, gamma);
}

/// Per-point estimating function S(u, theta) given C(u), C_hat(u) and
/// grad log C(u). Gamma requires the weight w.
inline ParamVector estimating_term(const DivergenceSpec& spec, double model_c, double chat,
                                   const ParamVector& grad, std::optional<double> w = std::nullopt) {
    const double e = spec.exponent;
    double factor = 0.0;
    switch (spec.kind) {
        case DivergenceKind::Alpha:
            factor = std::pow(model_c, e) * (std::pow(model_c, 1.0 - e) - std::pow(chat, 1.0 - e)) / (1.0 - e);
            break;
        case DivergenceKind::Beta:
            factor = std::pow(model_c, e) * (model_c - chat);
            break;
        case DivergenceKind::Gamma:
            if (!w) throw UsageError("gamma estimating function requires the weight w_hat");
            factor = std::pow(model_c, e) * (*w * model_c - chat);
            break;
    }
    ParamVector out(grad.size());
    for (std::size_t k = 0; k < grad.size(); ++k) out[k] = factor * grad[k];
    return out;
}

/// S(u, theta) at a single point.
inline ParamVector estimating_function(const DivergenceSpec& spec, Point u, double chat_u, const Copula& c,
                                       std::optional<double> w = std::nullopt) {
    if (spec.kind == DivergenceKind::Gamma && !w) {
        throw UsageError("gamma estimating function requires the weight w_hat");
    }
    LogCdf e = log_cdf_clamped(c, u, true);
    return estimating_term(spec, std::exp(e.log_value), chat_u, e.grad, w);
}

/// sum_i S(U_i, theta).
inline ParamVector estimating_sum(const DivergenceSpec& spec, const PseudoSample& u,
                                  const std::vector<double>& chat, const Copula& c) {
    const ModelEval m = evaluate_model(c, u, true);
    std::optional<double> w;
    if (spec.kind == DivergenceKind::Gamma) w = gamma_weight_from_values(m.c, chat, spec.exponent);
    ParamVector total(c.family().param_count(), 0.0);
    for (std::size_t i = 0; i < u.n(); ++i) {
        const ParamVector s = estimating_term(spec, m.c[i], chat[i], m.grad[i], w);
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += s[k];
    }
    return total;
}

/// Exact gradient of the loss in theta. For alpha and beta this equals
/// sum_i S(U_i); for gamma it is (sum C^{gamma+1})^{-gamma/(gamma+1)} sum_i S_gamma(U_i),
/// which carries the w_hat coupling through numerator and denominator.
inline ParamVector loss_gradient(const DivergenceSpec& spec, const PseudoSample& u,
                                 const std::vector<double>& chat, const Copula& c) {
    ParamVector g = estimating_sum(spec, u, chat, c);
    if (spec.kind == DivergenceKind::Gamma) {
        const ModelEval m = evaluate_model(c, u, false);
        double den = 0.0;
        for (double x : m.c) den += std::pow(x, spec.exponent + 1.0);
        const double scale = std::pow(den, -spec.exponent / (spec.exponent + 1.0));
        for (double& x : g) x *= scale;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Divergence between two copulas

/// D(C0, C1) from paired values of C0 and C1 on the support of dC0 with
/// integration weights `w` (1/mc for Monte Carlo, 1/(n+1) for empirical atoms).
///
/// The gamma divergence uses the diagonal entropy of C0 in its second term,
/// (1/gamma)(int C0^{gamma+1} dC0)^{1/(gamma+1)}, which makes it nonnegative by
/// Hoelder's inequality.
inline double divergence_from_values(const DivergenceSpec& spec, const std::vector<double>& c0,
                                     const std::vector<double>& c1, double w) {
    const double e = spec.exponent;
    const std::size_t n = c0.size();
    switch (spec.kind) {
        case DivergenceKind::Alpha: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += c0[i] - std::pow(c1[i], e) * std::pow(c0[i], 1.0 - e) + e * (c1[i] - c0[i]);
            }
            return w * s / (e * (1.0 - e));
        }
        case DivergenceKind::Beta: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += std::pow(c0[i], e + 1.0) / (e * (e + 1.0)) + std::pow(c1[i], e + 1.0) / (e + 1.0) -
                     c0[i] * std::pow(c1[i], e) / e;
            }
            return w * s;
        }
        case DivergenceKind::Gamma: {
            double cross = 0.0, diag1 = 0.0, diag0 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double p = std::pow(c1[i], e);
                cross += c0[i] * p;
                diag1 += c1[i] * p;
                diag0 += std::pow(c0[i], e + 1.0);
            }
            cross *= w;
            diag1 *= w;
            diag0 *= w;
            return -cross / (e * std::pow(diag1, e / (e + 1.0))) + std::pow(diag0, 1.0 / (e + 1.0)) / e;
        }
    }
    return 0.0;
}

struct DivergenceEstimate {
    double value = 0.0;
    double std_error = 0.0;  // batch-means standard error; 0 for exact atom sums
};

inline constexpr std::size_t kDefaultDivergenceMc = 100000;

/// Monte Carlo estimate of D(c0, c1) with integration against dC0, using
/// `mc` draws from c0. The standard error comes from 20 batch means.
inline DivergenceEstimate divergence_between_mc(const DivergenceSpec& spec, const Copula& c0, const Copula& c1,
                                                std::size_t mc, std::uint64_t seed) {
    if (c0.dim() != c1.dim()) throw InputError("divergence_between: dimension mismatch");
    if (mc < 20) throw InputError("divergence_between: need at least 20 Monte Carlo draws");
    const RowMatrix draws = sample(c0, mc, seed);
    std::vector<double> v0(mc), v1(mc);
    for (std::size_t i = 0; i < mc; ++i) {
        v0[i] = std::exp(log_cdf_clamped(c0, draws.row(i), false).log_value);
        v1[i] = std::exp(log_cdf_clamped(c1, draws.row(i), false).log_value);
    }
    DivergenceEstimate out;
    out.value = divergence_from_values(spec, v0, v1, 1.0 / static_cast<double>(mc));
    constexpr std::size_t batches = 20;
    const std::size_t per = mc / batches;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        std::vector<double> b0(v0.begin() + static_cast<std::ptrdiff_t>(b * per),
                               v0.begin() + static_cast<std::ptrdiff_t>((b + 1) * per));
        std::vector<double> b1(v1.begin() + static_cast<std::ptrdiff_t>(b * per),
                               v1.begin() + static_cast<std::ptrdiff_t>((b + 1) * per));
        const double val = divergence_from_values(spec, b0, b1, 1.0 / static_cast<double>(per));
        const double delta = val - mean;
        mean += delta / static_cast<double>(b + 1);
        m2 += delta * (val - mean);
    }
    out.std_error = std::sqrt(m2 / static_cast<double>(batches - 1) / static_cast<double>(batches));
    return out;
}

inline double divergence_between(const DivergenceSpec& spec, const Copula& c0, const Copula& c1,
                                 std::size_t mc = kDefaultDivergenceMc, std::uint64_t seed = 1) {
    return divergence_between_mc(spec, c0, c1, mc, seed).value;
}

/// D(C_hat, c1) with C_hat an empirical copula: the integral against dC_hat is
/// the exact sum over its atoms U_i, each of mass 1/(n+1).
inline double divergence_between(const DivergenceSpec& spec, const EmpiricalCopula& c0, const Copula& c1) {
    const PseudoSample& u = c0.sample();
    if (u.d() != c1.dim()) throw InputError("divergence_between: dimension mismatch");
    const std::vector<double> v0 = c0.eval_at_sample();
    const ModelEval m = evaluate_model(c1, u, false);
    return divergence_from_values(spec, v0, m.c, 1.0 / c0.denom());
}

}  // namespace mcde
