// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mcde/mcde.hpp"

using namespace mcde;

namespace {

constexpr std::uint64_t kSeed = 12345;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void run(int id, const std::string& title, double limit_s, const std::function<void(Outcome&)>& body) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit_s) {
        out.pass = false;
        out.detail << " [runtime " << secs << " s exceeds " << limit_s << " s]";
    }
    failures += out.pass ? 0 : 1;
    std::printf("%s criterion %d: %s (%.1f s)%s\n", out.pass ? "PASS" : "FAIL", id, title.c_str(), secs,
                out.detail.str().c_str());
    std::fflush(stdout);
}

std::string row_text(const MetricsRow& r) {
    std::ostringstream os;
    os.precision(4);
    os << r.estimator << " mean=" << r.mean << " bias=" << r.bias << " rmse=" << r.rmse;
    if (r.failures) os << " failures=" << r.failures;
    return os.str();
}

double stddev(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// int_{[0,1]^2} f(u, v) c0(u, v) du dv by nested adaptive Gauss-Kronrod.
template <class F>
double integrate_against_density(const Copula& c0, F f) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto inner = [&](double u) {
        auto g = [&](double v) {
            if (v <= 0.0 || v >= 1.0 || u <= 0.0 || u >= 1.0) return 0.0;
            const double p[2] = {u, v};
            return f(u, v) * pdf(c0, p);
        };
        return GK::integrate(g, 0.0, 1.0, 12, 1e-10);
    };
    return GK::integrate(inner, 0.0, 1.0, 12, 1e-10);
}

std::vector<Copula> sweep() {
    return {Copula::clayton(0.3), Copula::clayton(2.0), Copula::clayton(8.0), Copula::gumbel(1.0),
            Copula::gumbel(1.5),  Copula::gumbel(5.0),  Copula::frank(-6.0),  Copula::frank(0.5),
            Copula::frank(9.0),   Copula::joe(1.3),     Copula::joe(4.0),     Copula::gaussian(-0.7),
            Copula::gaussian(0.2), Copula::gaussian(0.9)};
}

void criterion1(Outcome& o) {
    const Study s = paper_study("table2");
    const MetricsTable t = run_study(s, 50, kSeed).at(0);
    const MetricsRow& mle = t.row("MLE");
    o.detail << " " << row_text(mle);
    o.require(mle.mean >= 0.45 && mle.mean <= 0.65, "MLE mean in [0.45, 0.65]");
    o.require(mle.rmse >= 0.10 && mle.rmse <= 0.18, "MLE RMSE in [0.10, 0.18]");
    for (const char* name : {"Alpha-MCDE(0.1)", "Beta-MCDE(0.1)", "Gamma-MCDE(0.1)"}) {
        const MetricsRow& r = t.row(name);
        o.detail << "; " << row_text(r);
        o.require(r.mean >= 0.45 && r.mean <= 0.70, std::string(name) + " mean in [0.45, 0.70]");
        o.require(r.rmse >= 0.10 && r.rmse <= 0.20, std::string(name) + " RMSE in [0.10, 0.20]");
        o.require(mle.rmse <= r.rmse + 0.02, std::string("RMSE(MLE) <= RMSE(") + name + ") + 0.02");
    }
}

void criterion2(Outcome& o) {
    const MetricsTable t = run_study(paper_study("table3"), 100, kSeed).at(0);
    const MetricsRow& mle = t.row("MLE");
    o.detail << " " << row_text(mle);
    for (const char* name : {"Alpha-MCDE(0.1)", "Beta-MCDE(0.1)", "Gamma-MCDE(0.1)"}) {
        const MetricsRow& r = t.row(name);
        o.detail << "; " << row_text(r);
        o.require(r.rmse < mle.rmse, std::string("RMSE(") + name + ") < RMSE(MLE)");
        o.require(std::fabs(r.bias) < std::fabs(mle.bias), std::string("|bias(") + name + ")| < |bias(MLE)|");
    }
}

void criterion3(Outcome& o) {
    const auto tables = run_study(paper_study("table4"), 30, kSeed);
    const MetricsTable& correct = tables.at(0);
    const MetricsTable& cont = tables.at(1);
    const MetricsRow& cm = correct.row("MLE");
    const MetricsRow& cb = correct.row("Beta-MCDE(0.1)");
    const MetricsRow& xm = cont.row("MLE");
    const MetricsRow& xb = cont.row("Beta-MCDE(0.1)");
    o.detail << " correct: " << row_text(cm) << "; " << row_text(cb) << " | contaminated: " << row_text(xm) << "; "
             << row_text(xb);
    o.require(std::fabs(cm.bias) < 0.03 && std::fabs(cb.bias) < 0.03, "correct |bias| < 0.03");
    o.require(cm.rmse <= cb.rmse, "correct RMSE(MLE) <= RMSE(beta)");
    o.require(std::fabs(xb.bias) < std::fabs(xm.bias), "contaminated |bias(beta)| < |bias(MLE)|");
    o.require(xb.rmse < 0.5 * xm.rmse, "contaminated RMSE(beta) < 0.5 RMSE(MLE)");
}

void criterion4(Outcome& o) {
    const auto tables = run_study(paper_study("table5"), 50, kSeed);
    const MetricsTable& correct = tables.at(0);
    const MetricsTable& mis = tables.at(1);
    const MetricsRow& c_opt = correct.row("OptBeta-MCDE");
    const MetricsRow& c_b01 = correct.row("Beta-MCDE(0.1)");
    const MetricsRow& m_opt = mis.row("OptBeta-MCDE");
    const MetricsRow& m_b1 = mis.row("Beta-MCDE(1)");
    const MetricsRow& m_mle = mis.row("MLE");
    o.detail << " correct: " << row_text(c_opt) << "; " << row_text(c_b01) << " | misspecified: " << row_text(m_opt)
             << "; " << row_text(m_b1) << "; " << row_text(m_mle);
    o.require(std::fabs(c_opt.rmse - c_b01.rmse) <= 0.03, "correct |RMSE(opt) - RMSE(beta 0.1)| <= 0.03");
    o.require(m_opt.rmse <= m_b1.rmse - 0.02, "misspecified RMSE(opt) <= RMSE(beta 1) - 0.02");
    o.require(m_opt.rmse <= m_mle.rmse, "misspecified RMSE(opt) <= RMSE(MLE)");
}

void criterion5(Outcome& o) {
    const std::vector<double> u{1e-8};
    for (const auto& c : {Copula::clayton(1.0), Copula::gumbel(2.0), Copula::frank(2.0), Copula::joe(2.0),
                          Copula::gaussian(0.5)}) {
        const double v = boundary_limit_scan(c, 0.5, u).at(0).value;
        o.require(v < 1e-3, std::string(family_name(c.tag())) + " alpha=0.5 value < 1e-3");
    }
    const double theta = 2.0;
    const double frank = boundary_limit_scan(Copula::frank(theta), 0.0, u).at(0).value;
    const double joe = boundary_limit_scan(Copula::joe(theta), 0.0, u).at(0).value;
    const double clayton = boundary_limit_scan(Copula::clayton(1.0), 0.0, u).at(0).value;
    const double gumbel = boundary_limit_scan(Copula::gumbel(2.0), 0.0, u).at(0).value;
    o.detail << " frank=" << frank << " joe=" << joe << " clayton=" << clayton << " gumbel=" << gumbel;
    o.require(std::fabs(frank - (1.0 / theta - 1.0 / std::expm1(theta))) < 1e-4, "Frank alpha=0 limit");
    o.require(std::fabs(joe - 1.0 / theta) < 1e-4, "Joe alpha=0 limit");
    o.require(clayton > 1e3, "Clayton alpha=0 value > 1e3");
    o.require(gumbel > 1e3, "Gumbel alpha=0 value > 1e3");
}

void criterion6(Outcome& o) {
    const Copula c = Copula::clayton(0.5);
    constexpr std::size_t n = 2000;
    constexpr std::size_t reps = 200;
    std::vector<double> a01(reps), a05(reps);
    parallel_for(
        reps,
        [&](std::size_t r) {
            const PseudoSample u = pseudo_observations(sample(c, n, derive_seed(kSeed, r)));
            const std::vector<double> chat = EmpiricalCopula(u).eval_at_sample();
            a01[r] = fit_mcde(u, chat, c.family(), DivergenceSpec::alpha(0.1)).theta_hat[0];
            a05[r] = fit_mcde(u, chat, c.family(), DivergenceSpec::alpha(0.5)).theta_hat[0];
        },
        default_threads());
    const double s01 = stddev(a01), s05 = stddev(a05);
    const double predicted = std::sqrt(asymptotic_covariance(c, 0.0, 200000, kSeed).Sigma(0, 0) / n);
    o.detail << " sd(alpha=0.1)=" << s01 << " sd(alpha=0.5)=" << s05 << " sqrt(Sigma0/n)=" << predicted;
    o.require(std::fabs(s01 / s05 - 1.0) <= 0.20, "sd agree within 20%");
    o.require(std::fabs(s01 / predicted - 1.0) <= 0.25, "sd(alpha=0.1) within 25% of sqrt(Sigma0/n)");
    o.require(std::fabs(s05 / predicted - 1.0) <= 0.25, "sd(alpha=0.5) within 25% of sqrt(Sigma0/n)");
}

void criterion7(Outcome& o) {
    for (auto [t0, t1] : {std::pair{0.5, 1.0}, std::pair{2.0, 3.5}}) {
        const Copula c0 = Copula::clayton(t0), c1 = Copula::clayton(t1);
        auto C = [](const Copula& c, double u, double v) {
            const double p[2] = {u, v};
            return cdf(c, p);
        };
        const double hellinger = 2.0 * integrate_against_density(c0, [&](double u, double v) {
            const double d = std::sqrt(C(c0, u, v)) - std::sqrt(C(c1, u, v));
            return d * d;
        });
        const double cvm = 0.5 * integrate_against_density(c0, [&](double u, double v) {
            const double d = C(c0, u, v) - C(c1, u, v);
            return d * d;
        });
        const double da = divergence_between(DivergenceSpec::alpha(0.5), c0, c1);
        const double db = divergence_between(DivergenceSpec::beta(1.0), c0, c1);
        o.detail << " (" << t0 << "," << t1 << "): D_alpha=" << da << " oracle=" << hellinger << " D_beta=" << db
                 << " oracle=" << cvm << ";";
        o.require(std::fabs(da - hellinger) <= 1e-3, "alpha(0.5) matches Hellinger form");
        o.require(std::fabs(db - cvm) <= 1e-3, "beta(1) matches half Cramer-von Mises");
        o.require(std::fabs(da / hellinger - 1.0) <= 0.01 && std::fabs(db / cvm - 1.0) <= 0.01,
                  "relative agreement within 1%");
    }
}

void criterion8(Outcome& o) {
    int checks = 0;
    auto C = [](const Copula& c, double u, double v) {
        const double p[2] = {u, v};
        return cdf(c, p);
    };
    // Frechet bounds and 2-increasingness on a 50 x 50 grid
    constexpr int g = 50;
    for (const auto& c : sweep()) {
        std::vector<double> grid((g + 1) * (g + 1));
        bool ok = true;
        for (int i = 0; i <= g; ++i) {
            for (int j = 0; j <= g; ++j) {
                const double u = i / double(g), v = j / double(g);
                const double val = C(c, u, v);
                grid[i * (g + 1) + j] = val;
                ok = ok && val >= std::max(0.0, u + v - 1.0) - 1e-12 && val <= std::min(u, v) + 1e-12;
            }
        }
        for (int i = 1; i <= g; ++i) {
            for (int j = 1; j <= g; ++j) {
                const double vol = grid[i * (g + 1) + j] - grid[(i - 1) * (g + 1) + j] - grid[i * (g + 1) + j - 1] +
                                   grid[(i - 1) * (g + 1) + j - 1];
                ok = ok && vol >= -1e-12;
            }
        }
        o.require(ok, std::string("Frechet/2-increasing ") + std::string(family_name(c.tag())));
        ++checks;
    }
    // gradient vs central differences
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> unif(0.02, 0.98);
    for (const auto& c : sweep()) {
        const double t = c.theta();
        const double h = 1e-5 * std::max(1.0, std::fabs(t));
        if ((c.tag() == Family::Gumbel || c.tag() == Family::Joe) && t - h < 1.0) continue;
        bool ok = true;
        for (int rep = 0; rep < 25; ++rep) {
            const double p[2] = {unif(rng), unif(rng)};
            const double gr = log_grad_cdf(c, p)[0];
            const double fd =
                (std::log(cdf(c.with_params({t + h}), p)) - std::log(cdf(c.with_params({t - h}), p))) / (2 * h);
            ok = ok && std::fabs(gr - fd) <= 1e-5 * std::max(std::fabs(fd), 1e-2);
        }
        o.require(ok, std::string("gradient FD ") + std::string(family_name(c.tag())));
        ++checks;
    }
    // sampler vs cdf sup distance at n = 1e5
    std::uint64_t seed = derive_seed(kSeed, 1);
    for (const auto& c : {Copula::clayton(2.0), Copula::gumbel(1.5), Copula::frank(-3.0), Copula::joe(2.5),
                          Copula::gaussian(0.6)}) {
        const RowMatrix m = sample(c, 100000, seed++);
        double sup = 0.0;
        std::vector<int> counts(20 * 20, 0);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const int a = static_cast<int>(std::ceil(m(i, 0) * 21.0)) - 1;
            const int b = static_cast<int>(std::ceil(m(i, 1) * 21.0)) - 1;
            if (a < 20 && b < 20) ++counts[a * 20 + b];
        }
        for (int a = 0; a < 20; ++a) {
            for (int b = 0; b < 20; ++b) {
                if (a > 0) counts[a * 20 + b] += counts[(a - 1) * 20 + b];
                if (b > 0) counts[a * 20 + b] += counts[a * 20 + b - 1];
                if (a > 0 && b > 0) counts[a * 20 + b] -= counts[(a - 1) * 20 + b - 1];
                const double emp = counts[a * 20 + b] / double(m.rows());
                sup = std::max(sup, std::fabs(emp - C(c, (a + 1) / 21.0, (b + 1) / 21.0)));
            }
        }
        o.require(sup < 0.01, std::string("sampler sup distance ") + std::string(family_name(c.tag())));
        ++checks;
    }
    // rank invariance
    {
        RowMatrix data = sample(Copula::gumbel(1.8), 500, derive_seed(kSeed, 2));
        const PseudoSample u1 = pseudo_observations(data);
        for (std::size_t i = 0; i < data.rows(); ++i) {
            data(i, 0) = std::exp(4.0 * data(i, 0));
            data(i, 1) = std::tan(data(i, 1) - 0.5);
        }
        const PseudoSample u2 = pseudo_observations(data);
        const CopulaFamily fam(Family::Gumbel, 2);
        o.require(u1 == u2, "pseudo-observations rank invariant");
        o.require(fit_mcde(u1, fam, DivergenceSpec::gamma(0.1)).theta_hat ==
                      fit_mcde(u2, fam, DivergenceSpec::gamma(0.1)).theta_hat,
                  "fit rank invariant");
        checks += 2;
    }
    // grid-scan oracle and first-order condition for every (family, spec)
    struct Case {
        Family f;
        double theta, lo, hi;
    };
    const std::vector<Case> cases{{Family::Clayton, 1.0, -5.0, 4.0},
                                  {Family::Gumbel, 1.7, -7.0, 3.0},
                                  {Family::Frank, 3.0, -30.0, 30.0},
                                  {Family::Joe, 2.0, -7.0, 3.0},
                                  {Family::Gaussian, 0.4, -3.0, 3.0}};
    const std::vector<DivergenceSpec> specs{DivergenceSpec::alpha(0.1), DivergenceSpec::alpha(0.5),
                                            DivergenceSpec::beta(0.1),  DivergenceSpec::beta(1.0),
                                            DivergenceSpec::gamma(0.1), DivergenceSpec::gamma(1.0)};
    constexpr int points = 1000;
    seed = derive_seed(kSeed, 3);
    for (const auto& cs : cases) {
        const CopulaFamily fam(cs.f, 2);
        for (int rep = 0; rep < 3; ++rep) {
            const PseudoSample u = pseudo_observations(sample(Copula(fam, {cs.theta}), 150, seed++));
            const std::vector<double> chat = EmpiricalCopula(u).eval_at_sample();
            const double step = (cs.hi - cs.lo) / (points - 1);
            for (const auto& spec : specs) {
                double best = INFINITY, best_x = cs.lo;
                for (int k = 0; k < points; ++k) {
                    const double x = cs.lo + k * step;
                    const double th = from_internal(cs.f, x);
                    if (cs.f == Family::Frank && th == 0.0) continue;
                    const double v = loss(spec, u, chat, Copula(fam, {th})).value;
                    if (v < best) {
                        best = v;
                        best_x = x;
                    }
                }
                const FitResult r = fit_mcde(u, chat, fam, spec);
                const std::string tag = std::string(family_name(cs.f)) + " " + spec.name();
                o.require(std::fabs(to_internal(cs.f, r.theta_hat[0]) - best_x) <= step, "grid oracle " + tag);
                const ParamVector s = estimating_sum(spec, u, chat, Copula(fam, r.theta_hat));
                o.require(r.converged && std::fabs(s[0]) <= 1e-6 * static_cast<double>(u.n()), "FOC " + tag);
                checks += 2;
            }
        }
    }
    o.detail << " " << checks << " checks";
}

}  // namespace

int main() {
    run(1, "correct Clayton study (50 reps)", 120, criterion1);
    run(2, "mixture contamination study (100 reps)", 300, criterion2);
    run(3, "d = 20 study (30 reps)", 1800, criterion3);
    run(4, "cross-validated exponent study (50 reps)", 900, criterion4);
    run(5, "boundary limits of the weighted score", 1, criterion5);
    run(6, "alpha-independence of the limiting variance", 600, criterion6);
    run(7, "Hellinger and Cramer-von Mises special cases", 120, criterion7);
    run(8, "property suite", 600, criterion8);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
