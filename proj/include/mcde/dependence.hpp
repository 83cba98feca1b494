#pragma once

// Rank dependence measures and the family-specific tau/rho relations used
// to warm-start the estimators.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "mcde/copula.hpp"
#include "mcde/matrix.hpp"

namespace mcde {

namespace detail {

// Merge sort counting swaps; sorts v[lo, hi) using buf.
inline std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                                 std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

// Number of tied pairs in a sorted sequence.
template <class It>
std::uint64_t tied_pairs(It first, It last) {
    std::uint64_t t = 0;
    while (first != last) {
        auto run = std::find_if(first, last, [&](double x) { return x != *first; });
        const auto len = static_cast<std::uint64_t>(std::distance(first, run));
        t += len * (len - 1) / 2;
        first = run;
    }
    return t;
}

}  // namespace detail

/// Kendall's tau-b in O(n log n) (Knight's algorithm).
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw InputError("kendall_tau: length mismatch");
    if (n < 2) return 0.0;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[idx[i]];
        ys[i] = y[idx[i]];
    }
    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t n1 = detail::tied_pairs(xs.begin(), xs.end());
    std::uint64_t n3 = 0;  // joint ties
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
        const std::uint64_t len = j - i;
        n3 += len * (len - 1) / 2;
        i = j;
    }
    std::vector<double> buf(n);
    const std::uint64_t swaps = detail::merge_count(ys, buf, 0, n);
    const std::uint64_t n2 = detail::tied_pairs(ys.begin(), ys.end());
    const double num = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
                       static_cast<double>(n3) - 2.0 * static_cast<double>(swaps);
    const double den = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    return den > 0.0 ? num / den : 0.0;
}

/// Spearman's rho (Pearson correlation of average ranks).
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw InputError("spearman_rho: length mismatch");
    auto ranks = [n](std::span<const double> v) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i + 1;
            while (j < n && v[idx[j]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j + 1);
            for (std::size_t k = i; k < j; ++k) r[idx[k]] = avg;
            i = j;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mean = 0.5 * static_cast<double>(n + 1);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    return (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

/// Debye function D_1(x) = (1/x) int_0^x t / (e^t - 1) dt.
inline double debye1(double x) {
    if (x == 0.0) return 1.0;
    if (x < 0.0) return debye1(-x) - 0.5 * x;
    auto f = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, x, 10, 1e-13) / x;
}

/// Population Kendall's tau of a one-parameter family.
inline double family_tau(Family f, double theta) {
    switch (f) {
        case Family::Clayton: return theta / (theta + 2.0);
        case Family::Gumbel: return 1.0 - 1.0 / theta;
        case Family::Frank:
            if (std::fabs(theta) < 1e-8) return theta / 9.0;
            return 1.0 - 4.0 / theta * (1.0 - debye1(theta));
        case Family::Joe: {
            if (theta == 1.0) return 0.0;
            if (std::fabs(theta - 2.0) < 1e-9) return 1.0 - boost::math::trigamma(2.0);
            return 1.0 + 2.0 / (2.0 - theta) *
                             (boost::math::digamma(2.0) - boost::math::digamma(2.0 / theta + 1.0));
        }
        case Family::Gaussian:
        case Family::StudentT: return 2.0 / std::numbers::pi * std::asin(theta);
        case Family::Independence: return 0.0;
    }
    return 0.0;
}

/// Inverts family_tau by bisection in the unconstrained coordinate. Values of
/// tau outside the attainable range are clamped to the nearest admissible theta.
inline double theta_from_tau(Family f, double tau) {
    switch (f) {
        case Family::Clayton: {
            const double t = std::clamp(tau, 0.02, 0.95);
            return 2.0 * t / (1.0 - t);
        }
        case Family::Gumbel: return 1.0 / (1.0 - std::clamp(tau, 0.0, 0.95));
        case Family::Gaussian:
        case Family::StudentT: return std::sin(0.5 * std::numbers::pi * std::clamp(tau, -0.95, 0.95));
        case Family::Independence: return 0.0;
        default: break;
    }
    double lo, hi;
    if (f == Family::Frank) {
        lo = -60.0;
        hi = 60.0;
        tau = std::clamp(tau, -0.9, 0.9);
        if (std::fabs(tau) < 1e-6) return tau >= 0 ? 1e-3 : -1e-3;
    } else {  // Joe, internal coordinate log(theta - 1)
        tau = std::clamp(tau, 1e-4, 0.9);
        lo = -12.0;
        hi = 6.0;
    }
    auto value = [&](double x) { return family_tau(f, from_internal(f, x)); };
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) < tau) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return from_internal(f, 0.5 * (lo + hi));
}

/// Average pairwise Kendall's tau over all column pairs.
inline double mean_pairwise_tau(const RowMatrix& data) {
    const std::size_t d = data.cols();
    double s = 0.0;
    std::size_t pairs = 0;
    std::vector<std::vector<double>> cols(d);
    for (std::size_t j = 0; j < d; ++j) cols[j] = data.column(j);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a + 1; b < d; ++b) {
            s += kendall_tau(cols[a], cols[b]);
            ++pairs;
        }
    }
    return pairs ? s / static_cast<double>(pairs) : 0.0;
}

}  // namespace mcde
