#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace mcde::optim {

struct ScalarResult {
    double x = 0.0;
    double fx = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t evaluations = 0;
};

/// Expands from x0 in golden-ratio steps until the objective rises on both
/// sides of an interior point. The search never leaves [-cap, cap]; if the
/// minimum sits on that edge the bracket ends there.
inline Bracket bracket_minimum(const std::function<double(double)>& f, double x0, double step, double cap) {
    constexpr double grow = 1.618033988749895;
    auto safe = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    x0 = std::clamp(x0, -cap, cap);
    double a = x0, fa = safe(a);
    double b = std::clamp(x0 + step, -cap, cap), fb = safe(b);
    std::size_t evals = 2;
    if (fb > fa) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    // now f decreases from a to b; keep walking in that direction
    double dir = b > a ? 1.0 : -1.0;
    double h = std::fabs(b - a);
    if (h == 0.0) {
        // x0 was on the cap; step inward
        dir = x0 > 0 ? -1.0 : 1.0;
        h = std::fabs(step);
        b = std::clamp(x0 + dir * h, -cap, cap);
        fb = safe(b);
        ++evals;
        if (fb > fa) return {std::min(a, b), std::max(a, b), evals};
    }
    while (true) {
        h *= grow;
        double c = std::clamp(b + dir * h, -cap, cap);
        const double fc = safe(c);
        ++evals;
        if (fc >= fb || c == b) {
            return {std::min(a, c), std::max(a, c), evals};
        }
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        if (std::fabs(c) >= cap) return {std::min(a, c), std::max(a, c), evals};
        if (evals > 200) return {std::min(a, c), std::max(a, c), evals};
    }
}

/// Brent's golden-section/parabolic minimization on [lo, hi] (Boost.Math).
/// `bits` sets the relative tolerance 2^{1-bits}; 26 is the limit for double.
inline ScalarResult brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                                   std::size_t max_iter, int bits = 26) {
    auto safe = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    std::uintmax_t iters = max_iter;
    const auto [x, fx] = boost::math::tools::brent_find_minima(safe, lo, hi, bits, iters);
    return {x, fx, static_cast<std::size_t>(iters), iters < max_iter};
}

struct VectorResult {
    std::vector<double> x;
    double fx = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Gradient descent with Armijo backtracking, used for multi-parameter models.
inline VectorResult gradient_descent(
    const std::function<double(const std::vector<double>&)>& f,
    const std::function<std::vector<double>(const std::vector<double>&)>& grad, std::vector<double> x,
    double tol, std::size_t max_iter) {
    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double e : v) s += e * e;
        return std::sqrt(s);
    };
    double fx = f(x);
    std::vector<double> g = grad(x);
    double step = 1.0;
    VectorResult out;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const double gn = norm(g);
        out.iterations = it;
        if (gn <= tol) {
            out.converged = true;
            break;
        }
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<double> trial(x);
            for (std::size_t k = 0; k < x.size(); ++k) trial[k] -= step * g[k];
            const double ft = f(trial);
            if (std::isfinite(ft) && ft <= fx - 1e-4 * step * gn * gn) {
                x = std::move(trial);
                fx = ft;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        g = grad(x);
    }
    out.x = std::move(x);
    out.fx = fx;
    out.grad_norm = norm(g);
    if (out.grad_norm <= tol) out.converged = true;
    return out;
}

}  // namespace mcde::optim
