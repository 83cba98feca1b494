#pragma once

// Exact samplers. Archimedean families use the Marshall-Olkin frailty
// construction U_k = psi^{-1}(E_k / V) with the mixing variable V matching the
// generator's Laplace transform; elliptical families push correlated latent
// draws through the univariate distribution function.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "mcde/copula.hpp"
#include "mcde/matrix.hpp"
#include "mcde/normal.hpp"

namespace mcde {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives well-separated child seeds from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace detail {

/// Uniform draw on the open interval (0, 1).
inline double open_uniform(Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double x;
    do {
        x = dist(rng);
    } while (x <= 0.0 || x >= 1.0);
    return x;
}

inline double std_exponential(Rng& rng) { return -std::log(open_uniform(rng)); }

/// Positive stable variable with Laplace transform exp(-t^alpha), 0 < alpha <= 1
/// (Kanter's representation).
inline double positive_stable(double alpha, Rng& rng) {
    if (alpha >= 1.0) return 1.0;
    const double theta = std::numbers::pi * open_uniform(rng);
    const double w = std_exponential(rng);
    const double a = std::pow(std::sin(alpha * theta), alpha / (1.0 - alpha)) *
                     std::sin((1.0 - alpha) * theta) /
                     std::pow(std::sin(theta), 1.0 / (1.0 - alpha));
    return std::pow(a / w, (1.0 - alpha) / alpha);
}

/// Logarithmic series variable, P(V = k) = -p^k / (k log(1 - p)), via Kemp's
/// LK algorithm. `log1m_p` is log(1 - p), passed separately for accuracy.
inline double logarithmic_series(double p, double log1m_p, Rng& rng) {
    const double v = open_uniform(rng);
    if (v >= p) return 1.0;
    const double u = open_uniform(rng);
    const double q = -std::expm1(log1m_p * u);  // 1 - (1-p)^u
    if (v <= q * q) {
        const double k = std::floor(1.0 + std::log(v) / std::log(q));
        return std::isfinite(k) ? std::max(k, 1.0) : 1.0;
    }
    return v <= q ? 2.0 : 1.0;
}

/// Sibuya variable with parameter alpha in (0, 1]: P(V > k) = prod_{j<=k} (1 - alpha/j).
/// Inverts the survival function by bracketing and bisection on the
/// log-gamma form, so arbitrarily heavy tails cost O(log k).
inline double sibuya(double alpha, Rng& rng) {
    if (alpha >= 1.0) return 1.0;
    const double u = open_uniform(rng);
    if (u <= alpha) return 1.0;  // P(V = 1) = alpha
    const double lg1ma = std::lgamma(1.0 - alpha);
    const double log_target = std::log1p(-u);  // want smallest k with P(V > k) <= 1 - u
    auto log_surv = [&](double k) {
        return std::lgamma(k + 1.0 - alpha) - std::lgamma(k + 1.0) - lg1ma;
    };
    double hi = 2.0;
    while (log_surv(hi) > log_target) {
        hi *= 2.0;
        if (hi > 1e300) return hi;
    }
    double lo = hi / 2.0;  // log_surv(lo) > target (or lo == 1)
    if (lo < 1.0) lo = 1.0;
    while (hi - lo > 1.0 && hi - lo > 1e-12 * hi) {
        const double mid = std::floor(0.5 * (lo + hi));
        if (log_surv(mid) > log_target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

inline double student_t_cdf(double x, double nu) {
    return boost::math::cdf(boost::math::students_t(nu), x);
}

inline double clamp_open(double x) {
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return std::clamp(x, lo, hi);
}

}  // namespace detail

/// Draws one observation from `c` into `out` (size d), consuming `rng`.
inline void sample_row(const Copula& c, Rng& rng, std::span<double> out) {
    const std::size_t d = c.dim();
    const double t = c.params().empty() ? 0.0 : c.params()[0];
    switch (c.tag()) {
        case Family::Independence:
            for (std::size_t k = 0; k < d; ++k) out[k] = detail::open_uniform(rng);
            return;
        case Family::Clayton: {
            std::gamma_distribution<double> gamma(1.0 / t, 1.0);
            const double v = gamma(rng);
            for (std::size_t k = 0; k < d; ++k) {
                const double e = detail::std_exponential(rng);
                out[k] = std::exp(-std::log1p(e / v) / t);
            }
            break;
        }
        case Family::Gumbel: {
            const double v = detail::positive_stable(1.0 / t, rng);
            for (std::size_t k = 0; k < d; ++k) {
                const double e = detail::std_exponential(rng);
                out[k] = std::exp(-std::pow(e / v, 1.0 / t));
            }
            break;
        }
        case Family::Frank: {
            if (t > 0.0) {
                const double log1m_p = -t;  // p = 1 - e^{-theta}
                const double p = -std::expm1(-t);
                const double v = detail::logarithmic_series(p, log1m_p, rng);
                for (std::size_t k = 0; k < d; ++k) {
                    const double e = detail::std_exponential(rng);
                    // psi^{-1}(s) = -log(1 - (1 - e^{-theta}) e^{-s}) / theta
                    out[k] = -std::log1p(std::expm1(-t) * std::exp(-e / v)) / t;
                }
            } else {
                // Negative dependence (d = 2): conditional inversion.
                const double u = detail::open_uniform(rng);
                const double w = detail::open_uniform(rng);
                const double eu = std::exp(-t * u);
                out[0] = u;
                out[1] = -std::log1p(w * std::expm1(-t) / (w + (1.0 - w) * eu)) / t;
            }
            break;
        }
        case Family::Joe: {
            const double v = detail::sibuya(1.0 / t, rng);
            for (std::size_t k = 0; k < d; ++k) {
                const double e = detail::std_exponential(rng);
                // psi^{-1}(s) = 1 - (1 - e^{-s})^{1/theta}
                out[k] = -std::expm1(std::log(-std::expm1(-e / v)) / t);
            }
            break;
        }
        case Family::Gaussian:
        case Family::StudentT: {
            std::normal_distribution<double> gauss(0.0, 1.0);
            const double z1 = gauss(rng);
            const double z2 = t * z1 + std::sqrt((1.0 - t) * (1.0 + t)) * gauss(rng);
            if (c.tag() == Family::Gaussian) {
                out[0] = normal::cdf(z1);
                out[1] = normal::cdf(z2);
            } else {
                const double nu = c.family().dof;
                std::chi_squared_distribution<double> chi2(nu);
                const double s = std::sqrt(chi2(rng) / nu);
                out[0] = detail::student_t_cdf(z1 / s, nu);
                out[1] = detail::student_t_cdf(z2 / s, nu);
            }
            break;
        }
    }
    for (std::size_t k = 0; k < d; ++k) out[k] = detail::clamp_open(out[k]);
}

/// n i.i.d. draws from `c`, one row per draw, using `rng`.
inline RowMatrix sample(const Copula& c, std::size_t n, Rng& rng) {
    if (n < 1) throw InputError("sample: n must be >= 1");
    RowMatrix out(n, c.dim());
    for (std::size_t i = 0; i < n; ++i) sample_row(c, rng, out.row(i));
    return out;
}

/// n i.i.d. draws from `c`; deterministic for a fixed seed.
inline RowMatrix sample(const Copula& c, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return sample(c, n, rng);
}

}  // namespace mcde
