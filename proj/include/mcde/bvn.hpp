#pragma once

// Bivariate standard normal distribution function.
//
// Genz's adaptation of the Drezner-Wesolowsky method: Gauss-Legendre
// quadrature of the Plackett integral for |r| < 0.925 and an asymptotic
// expansion plus correction integral for highly correlated cases. Absolute
// accuracy is close to double precision over the whole plane.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "mcde/normal.hpp"

namespace mcde {

namespace detail {

struct GaussLegendreRule {
    int size;
    std::array<double, 10> weight;
    std::array<double, 10> node;
};

inline constexpr GaussLegendreRule kGl6{
    3,
    {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
    {0.9324695142031522, 0.6612093864662647, 0.2386191860831970}};

inline constexpr GaussLegendreRule kGl12{
    6,
    {0.04717533638651177, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659,
     0.2334925365383547, 0.2491470458134029},
    {0.9815606342467191, 0.9041172563704750, 0.7699026741943050, 0.5873179542866171,
     0.3678314989981802, 0.1252334085114692}};

inline constexpr GaussLegendreRule kGl20{
    10,
    {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
     0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183821,
     0.1491729864726037, 0.1527533871307259},
    {0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
     0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
     0.2277858511416451, 0.07652652113349733}};

/// P(X > h, Y > k) for standard bivariate normal with correlation r.
inline double bvn_upper(double h, double k, double r) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (h == INFINITY || k == INFINITY) return 0.0;
    if (h == -INFINITY) return k == -INFINITY ? 1.0 : normal::cdf(-k);
    if (k == -INFINITY) return normal::cdf(-h);

    const double ar = std::fabs(r);
    const GaussLegendreRule& rule = ar < 0.3 ? kGl6 : (ar < 0.75 ? kGl12 : kGl20);

    double hk = h * k;
    double p = 0.0;

    if (ar < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = 0.5 * std::asin(r);
        for (int i = 0; i < rule.size; ++i) {
            for (double x : {1.0 - rule.node[i], 1.0 + rule.node[i]}) {
                const double sn = std::sin(asr * x);
                p += rule.weight[i] * std::exp((hk * sn - hs) / (1.0 - sn * sn));
            }
        }
        return std::clamp(p * asr / two_pi + normal::cdf(-h) * normal::cdf(-k), 0.0, 1.0);
    }

    if (r < 0.0) {
        k = -k;
        hk = -hk;
    }
    if (ar < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 80.0;
        double asr = -0.5 * (bs / as + hk);
        if (asr > -100.0) {
            p = a * std::exp(asr) *
                (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
        }
        if (hk > -100.0) {
            const double b = std::sqrt(bs);
            const double sp = std::sqrt(two_pi) * normal::cdf(-b / a);
            p -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        a *= 0.5;
        double acc = 0.0;
        for (int i = 0; i < rule.size; ++i) {
            for (double x : {1.0 - rule.node[i], 1.0 + rule.node[i]}) {
                const double xs = (a * x) * (a * x);
                asr = -0.5 * (bs / xs + hk);
                if (asr <= -100.0) continue;
                const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                const double rs = std::sqrt(1.0 - xs);
                const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                acc += rule.weight[i] * std::exp(asr) * (sp - ep);
            }
        }
        p = (a * acc - p) / two_pi;
    }
    if (r > 0.0) {
        p += normal::cdf(-std::max(h, k));
    } else if (h >= k) {
        p = -p;
    } else {
        const double l = h < 0.0 ? normal::cdf(k) - normal::cdf(h)
                                 : normal::cdf(-h) - normal::cdf(-k);
        p = l - p;
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

/// P(X <= x, Y <= y) for the standard bivariate normal with correlation rho.
inline double bvn_cdf(double x, double y, double rho) {
    return detail::bvn_upper(-x, -y, rho);
}

/// Bivariate standard normal density with correlation rho.
inline double bvn_pdf(double x, double y, double rho) {
    const double om = (1.0 - rho) * (1.0 + rho);
    const double q = (x * x - 2.0 * rho * x * y + y * y) / om;
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(om));
}

}  // namespace mcde
