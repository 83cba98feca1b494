#pragma once

// k-fold cross-validation of the beta exponent with a fixed anchor divergence.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "mcde/divergence.hpp"
#include "mcde/empirical.hpp"
#include "mcde/estimation.hpp"
#include "mcde/parallel.hpp"
#include "mcde/sampling.hpp"

namespace mcde {

struct CvConfig {
    std::size_t k = 5;
    std::vector<double> grid{0.1, 0.25, 0.5, 1.0};
    double anchor_beta = 0.1;
    std::uint64_t seed = 1;
    /// Reuse the global pseudo-observations for the training folds instead of
    /// re-ranking within each training subset.
    bool global_ranks = false;
    std::size_t threads = 1;
    FitOptions fit{};
};

struct CvResult {
    double beta_opt = 0.0;
    std::vector<double> grid;
    std::vector<double> cv_scores;                 // same order as grid
    std::vector<std::vector<double>> fold_theta;   // [grid index][fold]
    std::vector<std::size_t> fold_of;              // validation fold of each row
};

/// Seeded assignment of n rows to k folds: a uniform permutation cut into
/// consecutive blocks, the first n % k blocks one row larger.
inline std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0));
    // Fisher-Yates with a portable index draw
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(perm[i - 1], perm[j]);
    }
    std::vector<std::size_t> fold_of(n);
    const std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t r = 0; r < size; ++r) fold_of[perm[pos++]] = f;
    }
    return fold_of;
}

inline CvResult cv_select_exponent(const PseudoSample& u, const CopulaFamily& fam, const CvConfig& cfg) {
    if (cfg.k < 2) throw ConfigError("cv: k must be >= 2");
    if (cfg.grid.empty()) throw ConfigError("cv: exponent grid is empty");
    for (double b : cfg.grid) DivergenceSpec::beta(b);
    const DivergenceSpec anchor = DivergenceSpec::beta(cfg.anchor_beta);
    const std::size_t n = u.n();
    if (n / cfg.k < 3) throw ConfigError("cv: folds would have fewer than 3 rows");
    if (n < 5 * cfg.k) throw ConfigError("cv: need n >= 5k rows");

    CvResult res;
    res.grid = cfg.grid;
    res.fold_of = assign_folds(n, cfg.k, cfg.seed);

    struct Fold {
        PseudoSample train;
        std::vector<double> train_chat;
        PseudoSample valid;
    };
    std::vector<Fold> folds(cfg.k);
    for (std::size_t f = 0; f < cfg.k; ++f) {
        std::vector<std::size_t> tr, va;
        for (std::size_t i = 0; i < n; ++i) (res.fold_of[i] == f ? va : tr).push_back(i);
        RowMatrix train_rows = u.matrix().select_rows(tr);
        folds[f].train = cfg.global_ranks ? PseudoSample(std::move(train_rows), u.has_ties())
                                          : pseudo_observations(train_rows);
        folds[f].train_chat = EmpiricalCopula(folds[f].train).eval_at_sample();
        folds[f].valid = pseudo_observations(u.matrix().select_rows(va));
    }

    const std::size_t g = cfg.grid.size();
    res.fold_theta.assign(g, std::vector<double>(cfg.k, 0.0));
    std::vector<double> scores(g * cfg.k, 0.0);
    parallel_for(
        g * cfg.k,
        [&](std::size_t task) {
            const std::size_t gi = task / cfg.k, f = task % cfg.k;
            const Fold& fold = folds[f];
            const FitResult fit =
                fit_mcde(fold.train, fold.train_chat, fam, DivergenceSpec::beta(cfg.grid[gi]), cfg.fit);
            res.fold_theta[gi][f] = fit.theta_hat.at(0);
            scores[task] = divergence_between(anchor, EmpiricalCopula(fold.valid), Copula(fam, fit.theta_hat));
        },
        cfg.threads);

    res.cv_scores.assign(g, 0.0);
    for (std::size_t gi = 0; gi < g; ++gi) {
        for (std::size_t f = 0; f < cfg.k; ++f) res.cv_scores[gi] += scores[gi * cfg.k + f];
    }
    const auto best = std::min_element(res.cv_scores.begin(), res.cv_scores.end());
    res.beta_opt = cfg.grid[static_cast<std::size_t>(best - res.cv_scores.begin())];
    return res;
}

}  // namespace mcde
