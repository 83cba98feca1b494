#pragma once

// Numerical checks of power-boundedness: the size of C^alpha * grad log C
// over the unit square and along paths into the origin.

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mcde/copula.hpp"
#include "mcde/error.hpp"

namespace mcde {

struct TracePoint {
    double u = 0.0;
    double value = 0.0;
    bool underflow = false;
};

struct BoundednessReport {
    Family family = Family::Independence;
    double theta = 0.0;
    double alpha = 0.0;
    std::size_t grid_resolution = 0;
    double sup_value = 0.0;
    std::vector<double> sup_location;
    std::vector<TracePoint> diagonal_trace;  // u descending
    bool any_underflow = false;
};

enum class ScanPath { Diagonal, Parabolic };

namespace detail {

inline void require_bivariate(const Copula& c, const char* who) {
    if (c.dim() != 2) throw UnsupportedOperation(std::string(who) + ": bivariate copula required");
}

inline void require_parameter(const Copula& c, const char* who) {
    if (c.family().param_count() == 0) {
        throw UsageError(std::string(who) + ": " + std::string(family_name(c.tag())) + " has no parameter");
    }
}

}  // namespace detail

/// C(u,v)^alpha * |grad log C(u,v)| evaluated without the boundary clamp.
/// When C^alpha is below the smallest normal double the value is reported as 0.
inline TracePoint weighted_score(const Copula& c, double u, double v, double alpha) {
    const double pt[2] = {u, v};
    const LogCdf e = log_cdf_eval(c, pt, true);
    double g2 = 0.0;
    for (double g : e.grad) g2 += g * g;
    const double log_weight = alpha * e.log_value;
    TracePoint out{u, 0.0, false};
    if (log_weight < std::log(std::numeric_limits<double>::min())) {
        out.underflow = true;
        return out;
    }
    out.value = std::exp(log_weight) * std::sqrt(g2);
    return out;
}

/// Supremum of C^alpha |grad log C| over the open grid {k/(grid_n+1)}^2,
/// plus the trace along the diagonal.
inline BoundednessReport power_bounded_sup(const Copula& c, double alpha, std::size_t grid_n) {
    detail::require_bivariate(c, "power_bounded_sup");
    detail::require_parameter(c, "power_bounded_sup");
    if (grid_n < 10) throw InputError("power_bounded_sup: grid_n must be >= 10");
    BoundednessReport rep;
    rep.family = c.tag();
    rep.theta = c.theta();
    rep.alpha = alpha;
    rep.grid_resolution = grid_n;
    rep.sup_value = -1.0;
    const double h = 1.0 / static_cast<double>(grid_n + 1);
    for (std::size_t i = 1; i <= grid_n; ++i) {
        for (std::size_t j = 1; j <= grid_n; ++j) {
            const TracePoint p = weighted_score(c, i * h, j * h, alpha);
            rep.any_underflow = rep.any_underflow || p.underflow;
            if (p.value > rep.sup_value) {
                rep.sup_value = p.value;
                rep.sup_location = {i * h, j * h};
            }
        }
    }
    rep.diagonal_trace.reserve(grid_n);
    for (std::size_t k = grid_n; k >= 1; --k) {
        TracePoint p = weighted_score(c, k * h, k * h, alpha);
        p.u = k * h;
        rep.diagonal_trace.push_back(p);
    }
    return rep;
}

/// Evaluates C^alpha |grad log C| along u = v (or v = u^2) for strictly
/// decreasing u in (0, 0.5].
inline std::vector<TracePoint> boundary_limit_scan(const Copula& c, double alpha, const std::vector<double>& u_values,
                                                   ScanPath path = ScanPath::Diagonal) {
    detail::require_bivariate(c, "boundary_limit_scan");
    detail::require_parameter(c, "boundary_limit_scan");
    if (u_values.empty()) throw InputError("boundary_limit_scan: no u values");
    for (std::size_t k = 0; k < u_values.size(); ++k) {
        const double u = u_values[k];
        if (!(u > 0.0 && u <= 0.5)) throw InputError("boundary_limit_scan: u values must lie in (0, 0.5]");
        if (k > 0 && !(u < u_values[k - 1])) {
            throw InputError("boundary_limit_scan: u values must be strictly decreasing");
        }
    }
    std::vector<TracePoint> out;
    out.reserve(u_values.size());
    for (double u : u_values) {
        const double v = path == ScanPath::Diagonal ? u : u * u;
        TracePoint p = weighted_score(c, u, v, alpha);
        p.u = u;
        out.push_back(p);
    }
    return out;
}

/// Geometric sequence first, first*ratio, ... with `count` terms.
inline std::vector<double> geometric_sequence(double first, double ratio, std::size_t count) {
    std::vector<double> out(count);
    double x = first;
    for (auto& v : out) {
        v = x;
        x *= ratio;
    }
    return out;
}

struct SurfacePoint {
    double u, v, value;
};

/// Row-major (u outer, v inner) evaluation on the open grid.
inline std::vector<SurfacePoint> surface_grid(const Copula& c, double alpha, std::size_t grid_n) {
    detail::require_bivariate(c, "surface_grid");
    std::vector<SurfacePoint> out;
    out.reserve(grid_n * grid_n);
    const double h = 1.0 / static_cast<double>(grid_n + 1);
    for (std::size_t i = 1; i <= grid_n; ++i) {
        for (std::size_t j = 1; j <= grid_n; ++j) {
            out.push_back({i * h, j * h, weighted_score(c, i * h, j * h, alpha).value});
        }
    }
    return out;
}

inline void write_surface_csv(std::ostream& os, const std::vector<SurfacePoint>& grid) {
    os << "u,v,value\n";
    os.precision(17);
    for (const auto& p : grid) os << p.u << ',' << p.v << ',' << p.value << '\n';
}

}  // namespace mcde
