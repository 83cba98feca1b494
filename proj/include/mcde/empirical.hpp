#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mcde/error.hpp"
#include "mcde/matrix.hpp"

namespace mcde {

/// Rank-transformed observations U_ij = rank_ij / (n + 1), all in (0, 1).
class PseudoSample {
public:
    PseudoSample() = default;
    PseudoSample(RowMatrix u, bool has_ties) : u_(std::move(u)), has_ties_(has_ties) {}

    std::size_t n() const noexcept { return u_.rows(); }
    std::size_t d() const noexcept { return u_.cols(); }
    std::span<const double> row(std::size_t i) const { return u_.row(i); }
    const RowMatrix& matrix() const noexcept { return u_; }
    double operator()(std::size_t i, std::size_t j) const { return u_(i, j); }

    /// True if some column contained ties (resolved with average ranks).
    bool has_ties() const noexcept { return has_ties_; }

    /// True if some column is constant, which makes the sample useless for fitting.
    bool has_degenerate_column() const {
        if (n() < 2) return false;
        for (std::size_t j = 0; j < d(); ++j) {
            bool constant = true;
            for (std::size_t i = 1; i < n() && constant; ++i) constant = u_(i, j) == u_(0, j);
            if (constant) return true;
        }
        return false;
    }

    friend bool operator==(const PseudoSample&, const PseudoSample&) = default;

private:
    RowMatrix u_;
    bool has_ties_ = false;
};

/// Per-column ranks divided by n + 1. Without ties the rank of x_ij is the
/// number of column values <= x_ij; tied values share their average rank.
inline PseudoSample pseudo_observations(const RowMatrix& data) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n < 1) throw InputError("pseudo_observations: need at least one row");
    if (d < 1) throw InputError("pseudo_observations: need at least one column");
    for (double x : data.data()) {
        if (std::isnan(x)) throw InputError("pseudo_observations: NaN entry");
    }
    RowMatrix u(n, d);
    bool ties = false;
    const double denom = static_cast<double>(n + 1);
    std::vector<std::size_t> idx(n);
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return data(a, j) < data(b, j); });
        for (std::size_t i = 0; i < n;) {
            std::size_t k = i + 1;
            while (k < n && data(idx[k], j) == data(idx[i], j)) ++k;
            if (k - i > 1) ties = true;
            // average of ranks i+1 .. k
            const double rank = 0.5 * static_cast<double>(i + 1 + k);
            for (std::size_t m = i; m < k; ++m) u(idx[m], j) = rank / denom;
            i = k;
        }
    }
    return {std::move(u), ties};
}

/// Empirical copula C_hat(u) = (1/(n+1)) #{i : U_i <= u componentwise}.
/// Note C_hat(1,...,1) = n/(n+1).
class EmpiricalCopula {
public:
    explicit EmpiricalCopula(const PseudoSample& sample) : sample_(&sample) {}
    explicit EmpiricalCopula(PseudoSample&&) = delete;

    const PseudoSample& sample() const noexcept { return *sample_; }
    double denom() const noexcept { return static_cast<double>(sample_->n() + 1); }

    double eval(Point u) const {
        if (u.size() != sample_->d()) throw InputError("EmpiricalCopula::eval: dimension mismatch");
        for (double x : u) {
            if (std::isnan(x) || x < 0.0 || x > 1.0) throw InputError("EmpiricalCopula::eval: u outside [0,1]");
        }
        std::size_t count = 0;
        for (std::size_t i = 0; i < sample_->n(); ++i) {
            auto r = sample_->row(i);
            bool below = true;
            for (std::size_t j = 0; j < r.size() && below; ++j) below = r[j] <= u[j];
            count += below ? 1 : 0;
        }
        return static_cast<double>(count) / denom();
    }

    /// (C_hat(U_1), ..., C_hat(U_n)). Bivariate samples use a sorted sweep with a
    /// Fenwick tree, O(n log n); higher dimensions use the direct O(n^2 d) count.
    std::vector<double> eval_at_sample() const {
        return sample_->d() == 2 ? sweep_2d() : naive();
    }

private:
    std::vector<double> naive() const {
        const std::size_t n = sample_->n();
        const std::size_t d = sample_->d();
        const auto& m = sample_->matrix().data();
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* ui = m.data() + i * d;
            std::size_t count = 0;
            for (std::size_t k = 0; k < n; ++k) {
                const double* uk = m.data() + k * d;
                std::size_t j = 0;
                while (j < d && uk[j] <= ui[j]) ++j;
                count += (j == d) ? 1 : 0;
            }
            out[i] = static_cast<double>(count) / denom();
        }
        return out;
    }

    std::vector<double> sweep_2d() const {
        const std::size_t n = sample_->n();
        const auto& s = *sample_;
        // compress second coordinate to 1-based ranks (ties share the max position)
        std::vector<double> ys(n);
        for (std::size_t i = 0; i < n; ++i) ys[i] = s(i, 1);
        std::vector<double> sorted_y = ys;
        std::sort(sorted_y.begin(), sorted_y.end());
        auto y_rank = [&](double y) {
            return static_cast<std::size_t>(std::upper_bound(sorted_y.begin(), sorted_y.end(), y) -
                                            sorted_y.begin());
        };
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s(a, 0) < s(b, 0); });

        std::vector<std::size_t> tree(n + 1, 0);
        auto add = [&](std::size_t pos) {
            for (; pos <= n; pos += pos & (~pos + 1)) ++tree[pos];
        };
        auto prefix = [&](std::size_t pos) {
            std::size_t acc = 0;
            for (; pos > 0; pos -= pos & (~pos + 1)) acc += tree[pos];
            return acc;
        };
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t k = i + 1;
            while (k < n && s(order[k], 0) == s(order[i], 0)) ++k;
            for (std::size_t m = i; m < k; ++m) add(y_rank(ys[order[m]]));
            for (std::size_t m = i; m < k; ++m) {
                out[order[m]] = static_cast<double>(prefix(y_rank(ys[order[m]]))) / denom();
            }
            i = k;
        }
        return out;
    }

    const PseudoSample* sample_;
};

}  // namespace mcde
