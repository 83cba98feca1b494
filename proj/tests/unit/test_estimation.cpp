#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mcde/estimation.hpp"
#include "mcde/optimize.hpp"
#include "mcde/sampling.hpp"

using namespace mcde;

namespace {

struct GridCase {
    Family family;
    double theta;
    double lo, hi;  // internal-coordinate scan range
};

const std::vector<GridCase> kGridCases{{Family::Clayton, 1.0, -5.0, 4.0},
                                       {Family::Gumbel, 1.7, -7.0, 3.0},
                                       {Family::Frank, -3.0, -30.0, 30.0},
                                       {Family::Joe, 2.0, -7.0, 3.0},
                                       {Family::Gaussian, 0.4, -3.0, 3.0}};

double norm(const ParamVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST(Optimizer, BrentFindsQuadraticMinimum) {
    const auto r = optim::brent_minimize([](double x) { return (x - 1.25) * (x - 1.25) + 3.0; }, -4.0, 7.0, 200);
    EXPECT_NEAR(r.x, 1.25, 1e-7);
    EXPECT_TRUE(r.converged);
}

TEST(Optimizer, BracketContainsMinimum) {
    auto f = [](double x) { return std::cosh(x - 9.0); };
    const auto b = optim::bracket_minimum(f, 0.0, 0.5, 30.0);
    EXPECT_LE(b.lo, 9.0);
    EXPECT_GE(b.hi, 9.0);
    const auto edge = optim::bracket_minimum([](double x) { return -x; }, 0.0, 0.5, 30.0);
    EXPECT_EQ(edge.hi, 30.0);
}

TEST(Optimizer, GradientDescentOnQuadratic) {
    auto f = [](const std::vector<double>& x) { return (x[0] - 1) * (x[0] - 1) + 4 * (x[1] + 2) * (x[1] + 2); };
    auto g = [](const std::vector<double>& x) { return std::vector<double>{2 * (x[0] - 1), 8 * (x[1] + 2)}; };
    const auto r = optim::gradient_descent(f, g, {5.0, 5.0}, 1e-9, 2000);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 1.0, 1e-8);
    EXPECT_NEAR(r.x[1], -2.0, 1e-8);
}

TEST(FitMcde, RecoversParameterForEachFamily) {
    std::uint64_t seed = 200;
    for (const auto& gc : kGridCases) {
        const Copula truth(CopulaFamily(gc.family, 2), {gc.theta});
        const PseudoSample u = pseudo_observations(sample(truth, 3000, seed++));
        for (const auto& spec : {DivergenceSpec::alpha(0.5), DivergenceSpec::beta(0.1), DivergenceSpec::gamma(0.1)}) {
            const FitResult r = fit_mcde(u, truth.family(), spec);
            EXPECT_TRUE(r.converged);
            EXPECT_NEAR(r.theta_hat[0], gc.theta, 0.15 * std::max(1.0, std::fabs(gc.theta)))
                << family_name(gc.family) << " " << spec.name();
            EXPECT_EQ(r.method, "MCDE(" + spec.name() + ")");
        }
        const FitResult m = fit_mle(u, truth.family());
        EXPECT_NEAR(m.theta_hat[0], gc.theta, 0.15 * std::max(1.0, std::fabs(gc.theta))) << family_name(gc.family);
        EXPECT_EQ(m.method, "PseudoMLE");
    }
}

TEST(FitMcde, GumbelOnIndependentData) {
    const PseudoSample u = pseudo_observations(sample(Copula::independence(), 10000, 5));
    for (const auto& spec : {DivergenceSpec::alpha(0.5), DivergenceSpec::beta(0.1), DivergenceSpec::gamma(0.1)}) {
        const FitResult r = fit_mcde(u, CopulaFamily(Family::Gumbel, 2), spec);
        EXPECT_LT(r.theta_hat[0] - 1.0, 0.05) << spec.name();
    }
}

TEST(FitMcde, FirstOrderCondition) {
    std::uint64_t seed = 300;
    for (const auto& gc : kGridCases) {
        const Copula truth(CopulaFamily(gc.family, 2), {gc.theta});
        const PseudoSample u = pseudo_observations(sample(truth, 500, seed++));
        const std::vector<double> chat = EmpiricalCopula(u).eval_at_sample();
        for (const auto& spec : {DivergenceSpec::alpha(0.1), DivergenceSpec::alpha(0.5), DivergenceSpec::beta(0.1),
                                 DivergenceSpec::beta(1.0), DivergenceSpec::gamma(0.1), DivergenceSpec::gamma(1.0)}) {
            const FitResult r = fit_mcde(u, chat, truth.family(), spec);
            ASSERT_TRUE(r.converged);
            const double s = norm(estimating_sum(spec, u, chat, truth.with_params(r.theta_hat)));
            EXPECT_LE(s, 1e-6 * static_cast<double>(u.n())) << family_name(gc.family) << " " << spec.name();
            EXPECT_LE(r.gradient_norm, 1e-6 * static_cast<double>(u.n()));
        }
    }
}

TEST(FitMcde, AgreesWithGridScan) {
    constexpr int grid = 1000;
    const std::vector<DivergenceSpec> specs{DivergenceSpec::alpha(0.5), DivergenceSpec::beta(0.1),
                                            DivergenceSpec::gamma(0.1)};
    std::uint64_t seed = 400;
    for (const auto& gc : kGridCases) {
        const CopulaFamily fam(gc.family, 2);
        for (int rep = 0; rep < 20; ++rep) {
            const double t = gc.family == Family::Frank ? gc.theta * (rep % 2 ? 1 : -1) : gc.theta;
            const PseudoSample u = pseudo_observations(sample(Copula(fam, {t}), 100, seed++));
            const std::vector<double> chat = EmpiricalCopula(u).eval_at_sample();
            const double step = (gc.hi - gc.lo) / (grid - 1);
            auto scan = [&](auto objective) {
                double best_x = gc.lo, best = INFINITY;
                for (int k = 0; k < grid; ++k) {
                    const double x = gc.lo + k * step;
                    const double th = from_internal(gc.family, x);
                    if (gc.family == Family::Frank && th == 0.0) continue;
                    const double v = objective(th);
                    if (v < best) {
                        best = v;
                        best_x = x;
                    }
                }
                return best_x;
            };
            for (const auto& spec : specs) {
                const double xg = scan([&](double th) { return loss(spec, u, chat, Copula(fam, {th})).value; });
                const FitResult r = fit_mcde(u, chat, fam, spec);
                EXPECT_NEAR(to_internal(gc.family, r.theta_hat[0]), xg, step)
                    << family_name(gc.family) << " " << spec.name() << " rep " << rep;
            }
            const double xm = scan([&](double th) { return negative_log_likelihood(u, Copula(fam, {th})); });
            EXPECT_NEAR(to_internal(gc.family, fit_mle(u, fam).theta_hat[0]), xm, step)
                << family_name(gc.family) << " MLE rep " << rep;
        }
    }
}

TEST(FitMcde, RankInvariance) {
    RowMatrix data = sample(Copula::joe(2.0), 400, 9);
    const PseudoSample u1 = pseudo_observations(data);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        data(i, 0) = std::log(data(i, 0) / (1.0 - data(i, 0)));
        data(i, 1) = std::exp(3.0 * data(i, 1));
    }
    const PseudoSample u2 = pseudo_observations(data);
    const CopulaFamily fam(Family::Joe, 2);
    EXPECT_EQ(fit_mcde(u1, fam, DivergenceSpec::beta(0.1)).theta_hat, fit_mcde(u2, fam, DivergenceSpec::beta(0.1)).theta_hat);
    EXPECT_EQ(fit_mle(u1, fam).theta_hat, fit_mle(u2, fam).theta_hat);
}

TEST(FitMcde, ConsistencyAsSampleGrows) {
    const Copula truth = Copula::clayton(1.0);
    std::vector<double> err;
    for (std::size_t n : {200u, 2000u, 20000u}) {
        const int reps = n == 20000 ? 2 : 10;
        double e = 0.0;
        for (int r = 0; r < reps; ++r) {
            const PseudoSample u = pseudo_observations(sample(truth, n, 1000 + r));
            e += std::fabs(fit_mcde(u, truth.family(), DivergenceSpec::beta(0.1)).theta_hat[0] - 1.0);
        }
        err.push_back(e / reps);
    }
    EXPECT_GT(err[0], err[1]);
    EXPECT_GT(err[1], err[2]);
}

TEST(FitMle, HighDimensionalClayton) {
    const Copula truth = Copula::clayton(2.0, 10);
    const PseudoSample u = pseudo_observations(sample(truth, 2500, 77));
    const FitResult m = fit_mle(u, truth.family());
    EXPECT_NEAR(m.theta_hat[0], 2.0, 0.15);
    const FitResult b = fit_mcde(u, truth.family(), DivergenceSpec::beta(0.1));
    EXPECT_NEAR(b.theta_hat[0], 2.0, 0.15);
}

TEST(FitErrors, BadInputs) {
    const CopulaFamily clayton(Family::Clayton, 2);
    const PseudoSample constant(RowMatrix(5, 2, std::vector<double>{0.5, 0.1, 0.5, 0.2, 0.5, 0.3, 0.5, 0.4, 0.5, 0.6}),
                                true);
    EXPECT_THROW(fit_mcde(constant, clayton, DivergenceSpec::beta(0.1)), InputError);
    const PseudoSample tiny = pseudo_observations(RowMatrix(2, 2, std::vector<double>{1, 2, 3, 4}));
    EXPECT_THROW(fit_mle(tiny, clayton), InputError);
    const PseudoSample ok = pseudo_observations(sample(Copula::gumbel(2.0, 3), 50, 1));
    EXPECT_THROW(fit_mle(ok, CopulaFamily(Family::Gumbel, 3)), UnsupportedOperation);
    EXPECT_THROW(fit_mcde(ok, CopulaFamily(Family::Independence, 3), DivergenceSpec::beta(0.1)), UsageError);
    EXPECT_THROW(fit_mcde(ok, clayton, DivergenceSpec::beta(0.1)), InputError);
}

TEST(Covariance, StructureAndDeterminism) {
    const Copula c = Copula::clayton(0.5);
    const CovarianceReport r = asymptotic_covariance(c, 0.0, 5000, 3);
    EXPECT_GT(r.A(0, 0), 0.0);
    EXPECT_GT(r.Sigma(0, 0), 0.0);
    EXPECT_EQ(r.mc_samples, 5000u);
    EXPECT_NEAR(r.Sigma(0, 0), r.B(0, 0) / (r.A(0, 0) * r.A(0, 0)), 1e-12 * r.Sigma(0, 0));
    const CovarianceReport again = asymptotic_covariance(c, 0.0, 5000, 3);
    EXPECT_EQ(r.Sigma, again.Sigma);
    EXPECT_THROW(asymptotic_covariance(Copula::independence(), 0.0), UsageError);
}

// With known uniform margins the sandwich formula is the exact limit; this
// checks the A and B integrals against a simulation of the estimator itself.
TEST(Covariance, MatchesSimulationWithKnownMargins) {
    const Copula c = Copula::clayton(0.5);
    const double sigma = asymptotic_covariance(c, 0.0, 40000, 11).Sigma(0, 0);
    constexpr std::size_t n = 2000;
    constexpr int reps = 150;
    std::vector<double> est;
    for (int r = 0; r < reps; ++r) {
        const PseudoSample u(sample(c, n, derive_seed(77, r)), false);
        est.push_back(fit_mcde(u, c.family(), DivergenceSpec::alpha(0.5)).theta_hat[0]);
    }
    double m = 0.0, v = 0.0;
    for (double x : est) m += x;
    m /= reps;
    for (double x : est) v += (x - m) * (x - m);
    v /= reps - 1;
    EXPECT_NEAR(n * v / sigma, 1.0, 0.25);
}
