#pragma once

// Simulation scenarios and the seeded repetition harness.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <nlohmann/json.hpp>

#include "mcde/copula.hpp"
#include "mcde/divergence.hpp"
#include "mcde/empirical.hpp"
#include "mcde/estimation.hpp"
#include "mcde/model_selection.hpp"
#include "mcde/normal.hpp"
#include "mcde/parallel.hpp"
#include "mcde/sampling.hpp"

namespace mcde {

enum class ScenarioKind { CorrectClayton, MixtureI, MarginalII, HighDimCorrect, HighDimContaminated, CvStudy };

inline std::string_view scenario_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::CorrectClayton: return "CorrectClayton";
        case ScenarioKind::MixtureI: return "MixtureI";
        case ScenarioKind::MarginalII: return "MarginalII";
        case ScenarioKind::HighDimCorrect: return "HighDimCorrect";
        case ScenarioKind::HighDimContaminated: return "HighDimContaminated";
        case ScenarioKind::CvStudy: return "CvStudy";
    }
    return "unknown";
}

inline ScenarioKind parse_scenario(std::string_view s) {
    for (auto k : {ScenarioKind::CorrectClayton, ScenarioKind::MixtureI, ScenarioKind::MarginalII,
                   ScenarioKind::HighDimCorrect, ScenarioKind::HighDimContaminated, ScenarioKind::CvStudy}) {
        if (s == scenario_name(k)) return k;
    }
    throw ConfigError("unknown scenario kind '" + std::string(s) + "'");
}

enum class MarginalSpec { Uniform, NormalMixture };

struct ContaminantSpec {
    Family family = Family::StudentT;
    double rho = -0.5;
    double dof = 5.0;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::CorrectClayton;
    std::size_t d = 2;
    std::size_t n = 200;
    double theta_true = 0.5;
    /// Contamination rate. For MarginalII it is the weight of N(5,1) in the
    /// first marginal instead.
    double pi = 0.0;
    ContaminantSpec contaminant{};
    MarginalSpec marginal = MarginalSpec::Uniform;
    double marginal_shift = 5.0;
    /// Weight of N(shift,1) when a non-MarginalII scenario uses the mixture marginal.
    double marginal_weight = 0.05;
    std::uint64_t seed = 1;

    /// Settings used in the simulation study for each scenario kind.
    static ScenarioConfig defaults(ScenarioKind k) {
        ScenarioConfig c;
        c.kind = k;
        switch (k) {
            case ScenarioKind::CorrectClayton: break;
            case ScenarioKind::MixtureI: c.pi = 0.025; break;
            case ScenarioKind::MarginalII:
                c.pi = 0.05;
                c.marginal = MarginalSpec::NormalMixture;
                break;
            case ScenarioKind::HighDimCorrect:
                c.d = 20;
                c.n = 2500;
                c.theta_true = 2.0;
                c.contaminant.family = Family::Independence;
                break;
            case ScenarioKind::HighDimContaminated:
                c.d = 20;
                c.n = 2500;
                c.theta_true = 2.0;
                c.pi = 0.05;
                c.contaminant.family = Family::Independence;
                break;
            case ScenarioKind::CvStudy: c.pi = 0.1; break;
        }
        return c;
    }

    void validate() const {
        if (!(pi >= 0.0 && pi < 1.0)) throw ConfigError("scenario: pi must lie in [0, 1)");
        if (d < 2) throw ConfigError("scenario: d must be >= 2");
        if (n < 2) throw ConfigError("scenario: n must be >= 2");
        if (!(theta_true > 0.0)) throw ConfigError("scenario: Clayton theta must be > 0");
        if (contaminant.family == Family::StudentT || contaminant.family == Family::Gaussian) {
            if (d != 2 && pi > 0.0 && kind != ScenarioKind::MarginalII) {
                throw ConfigError("scenario: elliptical contaminants need d = 2");
            }
            if (!(contaminant.rho > -1.0 && contaminant.rho < 1.0)) throw ConfigError("scenario: |rho| must be < 1");
            if (contaminant.family == Family::StudentT && !(contaminant.dof > 0.0)) {
                throw ConfigError("scenario: dof must be > 0");
            }
        }
    }

    Copula model() const { return Copula::clayton(theta_true, d); }

    Copula contaminant_copula() const {
        switch (contaminant.family) {
            case Family::StudentT: return Copula::student_t(contaminant.rho, contaminant.dof);
            case Family::Gaussian: return Copula::gaussian(contaminant.rho);
            case Family::Independence: return Copula::independence(d);
            default: throw ConfigError("scenario: unsupported contaminant family");
        }
    }
};

/// Quantile of (1 - pi) N(0,1) + pi N(shift,1).
inline double normal_mixture_quantile(double p, double pi, double shift) {
    if (p <= 0.0) return -INFINITY;
    if (p >= 1.0) return INFINITY;
    auto f = [&](double x) {
        const double cdf = (1.0 - pi) * normal::cdf(x) + pi * normal::cdf(x - shift);
        const double pdf = (1.0 - pi) * normal::pdf(x) + pi * normal::pdf(x - shift);
        return std::make_pair(cdf - p, pdf);
    };
    const double lo = std::min(normal::quantile(p), normal::quantile(p) + shift) - 1.0;
    const double hi = std::max(normal::quantile(p), normal::quantile(p) + shift) + 1.0;
    std::uintmax_t iters = 200;
    return boost::math::tools::newton_raphson_iterate(f, normal::quantile(p), lo, hi, 52, iters);
}

/// Draws the n x d matrix described by cfg. Clean rows, the contamination
/// indicator and contaminant rows use separate derived streams, so a scenario
/// with pi = 0 produces exactly the rows of the uncontaminated model.
inline RowMatrix generate_dataset(const ScenarioConfig& cfg) {
    cfg.validate();
    const Copula model = cfg.model();
    const bool mixes = cfg.pi > 0.0 && cfg.kind != ScenarioKind::MarginalII;
    std::optional<Copula> cont;
    if (mixes) cont = cfg.contaminant_copula();
    Rng rng_model(derive_seed(cfg.seed, 0));
    Rng rng_pick(derive_seed(cfg.seed, 1));
    Rng rng_cont(derive_seed(cfg.seed, 2));
    RowMatrix out(cfg.n, cfg.d);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        if (mixes && detail::open_uniform(rng_pick) < cfg.pi) {
            sample_row(*cont, rng_cont, out.row(i));
        } else {
            sample_row(model, rng_model, out.row(i));
        }
    }
    if (cfg.marginal == MarginalSpec::NormalMixture) {
        const double w = cfg.kind == ScenarioKind::MarginalII ? cfg.pi : cfg.marginal_weight;
        for (std::size_t i = 0; i < cfg.n; ++i) {
            out(i, 0) = normal_mixture_quantile(out(i, 0), w, cfg.marginal_shift);
            for (std::size_t j = 1; j < cfg.d; ++j) out(i, j) = normal::quantile(out(i, j));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Estimators and the repetition harness

struct MleEstimator {};
struct McdeEstimator {
    DivergenceSpec spec;
};
struct CvEstimator {
    CvConfig cv;
};

struct EstimatorSpec {
    std::string name;
    std::variant<MleEstimator, McdeEstimator, CvEstimator> method;

    static EstimatorSpec mle() { return {"MLE", MleEstimator{}}; }
    static EstimatorSpec mcde(const DivergenceSpec& s) {
        std::string label = std::string(kind_name(s.kind));
        label[0] = static_cast<char>(std::toupper(label[0]));
        std::ostringstream os;
        os << label << "-MCDE(" << s.exponent << ")";
        return {os.str(), McdeEstimator{s}};
    }
    static EstimatorSpec opt_beta(const CvConfig& cv) { return {"OptBeta-MCDE", CvEstimator{cv}}; }
};

/// Fits one estimator; the seed only matters for the CV estimator's folds.
inline FitResult run_estimator(const EstimatorSpec& est, const PseudoSample& u, const CopulaFamily& fam,
                               std::uint64_t seed) {
    return std::visit(
        [&](const auto& m) -> FitResult {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MleEstimator>) {
                return fit_mle(u, fam);
            } else if constexpr (std::is_same_v<T, McdeEstimator>) {
                return fit_mcde(u, fam, m.spec);
            } else {
                CvConfig cv = m.cv;
                cv.seed = seed;
                const CvResult sel = cv_select_exponent(u, fam, cv);
                FitResult r = fit_mcde(u, fam, DivergenceSpec::beta(sel.beta_opt), cv.fit);
                r.method = "OptBeta(" + DivergenceSpec::beta(sel.beta_opt).name() + ")";
                return r;
            }
        },
        est.method);
}

struct MetricsRow {
    std::string estimator;
    double mean = 0.0;
    double stddev = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    std::size_t reps = 0;
    std::size_t failures = 0;
    std::vector<double> estimates;  // successful reps, in rep order
};

struct MetricsTable {
    std::string scenario;
    double theta_true = 0.0;
    std::size_t repetitions = 0;
    std::uint64_t master_seed = 0;
    std::vector<MetricsRow> rows;

    const MetricsRow& row(std::string_view name) const {
        for (const auto& r : rows) {
            if (r.estimator == name) return r;
        }
        throw InputError("metrics table has no estimator '" + std::string(name) + "'");
    }
};

/// Mean, sample standard deviation, bias and RMSE of the estimates. Values are
/// sorted before summation so the result is independent of completion order.
inline void summarize(MetricsRow& row, double truth) {
    std::vector<double> v = row.estimates;
    std::sort(v.begin(), v.end());
    row.reps = v.size();
    if (v.empty()) {
        row.mean = row.stddev = row.bias = row.rmse = NAN;
        return;
    }
    const double m = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    row.mean = s / m;
    double ss = 0.0, se = 0.0;
    for (double x : v) {
        ss += (x - row.mean) * (x - row.mean);
        se += (x - truth) * (x - truth);
    }
    row.stddev = v.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    row.bias = row.mean - truth;
    row.rmse = std::sqrt(se / m);
}

inline MetricsTable run_experiment(const ScenarioConfig& cfg, const std::vector<EstimatorSpec>& estimators,
                                   std::size_t reps, std::uint64_t master_seed,
                                   std::size_t threads = default_threads()) {
    if (reps < 2) throw ConfigError("run_experiment: reps must be >= 2");
    if (estimators.empty()) throw ConfigError("run_experiment: no estimators");
    cfg.validate();
    const CopulaFamily fam(Family::Clayton, cfg.d);
    const std::size_t m = estimators.size();
    std::vector<double> theta(reps * m, NAN);
    parallel_for(
        reps,
        [&](std::size_t r) {
            ScenarioConfig rc = cfg;
            rc.seed = derive_seed(master_seed, 2 * r);
            const PseudoSample u = pseudo_observations(generate_dataset(rc));
            for (std::size_t e = 0; e < m; ++e) {
                try {
                    const FitResult fit = run_estimator(estimators[e], u, fam, derive_seed(master_seed, 2 * r + 1));
                    const double t = fit.theta_hat.at(0);
                    if (fit.converged && std::isfinite(t)) theta[r * m + e] = t;
                } catch (const Error&) {
                    // recorded as a failed rep
                }
            }
        },
        threads);

    MetricsTable table;
    table.scenario = std::string(scenario_name(cfg.kind));
    table.theta_true = cfg.theta_true;
    table.repetitions = reps;
    table.master_seed = master_seed;
    for (std::size_t e = 0; e < m; ++e) {
        MetricsRow row;
        row.estimator = estimators[e].name;
        for (std::size_t r = 0; r < reps; ++r) {
            const double t = theta[r * m + e];
            if (std::isnan(t)) {
                ++row.failures;
            } else {
                row.estimates.push_back(t);
            }
        }
        summarize(row, cfg.theta_true);
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline void write_metrics_csv(std::ostream& os, const MetricsTable& t, std::string_view prefix = {}) {
    os.precision(10);
    for (const auto& r : t.rows) {
        os << prefix << r.estimator << ',' << r.mean << ',' << r.stddev << ',' << r.bias << ',' << r.rmse << ','
           << r.reps << ',' << r.failures << '\n';
    }
}

inline constexpr std::string_view kMetricsCsvHeader = "estimator,mean,stddev,bias,rmse,reps,failures";

// ---------------------------------------------------------------------------
// Scenario config text format

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const auto x = std::stoull(v, &pos);
        if (pos != v.size() || v.front() == '-') throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a non-negative integer, got '" + v + "'");
    }
}

inline void apply_key(ScenarioConfig& c, const std::string& key, const std::string& v) {
    if (key == "kind") {
        // handled first by the caller
    } else if (key == "d") {
        c.d = parse_uint(key, v);
    } else if (key == "n") {
        c.n = parse_uint(key, v);
    } else if (key == "theta") {
        c.theta_true = parse_double(key, v);
    } else if (key == "pi") {
        c.pi = parse_double(key, v);
    } else if (key == "seed") {
        c.seed = parse_uint(key, v);
    } else if (key == "contaminant") {
        try {
            c.contaminant.family = parse_family(v);
        } catch (const Error&) {
            throw ConfigError("config: unknown contaminant family '" + v + "'");
        }
    } else if (key == "contaminant_rho") {
        c.contaminant.rho = parse_double(key, v);
    } else if (key == "contaminant_dof") {
        c.contaminant.dof = parse_double(key, v);
    } else if (key == "marginal") {
        if (v == "uniform") {
            c.marginal = MarginalSpec::Uniform;
        } else if (v == "normal_mixture") {
            c.marginal = MarginalSpec::NormalMixture;
        } else {
            throw ConfigError("config: marginal must be uniform or normal_mixture");
        }
    } else if (key == "marginal_weight") {
        c.marginal_weight = parse_double(key, v);
    } else if (key == "marginal_shift") {
        c.marginal_shift = parse_double(key, v);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

}  // namespace detail

/// Parses a scenario from JSON (an object) or from key=value lines; '#' starts
/// a comment. Unset keys take the defaults of the given kind.
inline ScenarioConfig parse_scenario_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> kv;
    const std::string t = detail::trim(text);
    if (!t.empty() && t.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(t);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: invalid JSON: ") + e.what());
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            kv.emplace_back(it.key(), it.value().is_string() ? it.value().get<std::string>() : it.value().dump());
        }
    } else {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("config: expected key=value, got '" + line + "'");
            kv.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        }
    }
    ScenarioKind kind = ScenarioKind::CorrectClayton;
    for (const auto& [k, v] : kv) {
        if (k == "kind") kind = parse_scenario(v);
    }
    ScenarioConfig cfg = ScenarioConfig::defaults(kind);
    for (const auto& [k, v] : kv) detail::apply_key(cfg, k, v);
    cfg.validate();
    return cfg;
}

}  // namespace mcde

namespace mcde {

// ---------------------------------------------------------------------------
// The paper's simulation studies

struct StudyPart {
    std::string label;
    ScenarioConfig scenario;
    std::vector<EstimatorSpec> estimators;
};

struct Study {
    std::string name;
    std::size_t default_reps = 50;
    std::vector<StudyPart> parts;
};

/// Preset studies: table2 (correct Clayton), table3 (mixture I), table3b
/// (marginal II), table4 (d = 20 correct and contaminated), table5 (CV).
inline Study paper_study(std::string_view name) {
    const std::vector<EstimatorSpec> four{EstimatorSpec::mle(), EstimatorSpec::mcde(DivergenceSpec::alpha(0.1)),
                                          EstimatorSpec::mcde(DivergenceSpec::beta(0.1)),
                                          EstimatorSpec::mcde(DivergenceSpec::gamma(0.1))};
    Study s;
    s.name = std::string(name);
    if (name == "table2") {
        s.parts = {{"correct", ScenarioConfig::defaults(ScenarioKind::CorrectClayton), four}};
    } else if (name == "table3") {
        s.default_reps = 100;
        s.parts = {{"mixture", ScenarioConfig::defaults(ScenarioKind::MixtureI), four}};
    } else if (name == "table3b") {
        s.parts = {{"marginal", ScenarioConfig::defaults(ScenarioKind::MarginalII), four}};
    } else if (name == "table4") {
        s.default_reps = 30;
        const std::vector<EstimatorSpec> two{EstimatorSpec::mle(), EstimatorSpec::mcde(DivergenceSpec::beta(0.1))};
        s.parts = {{"correct", ScenarioConfig::defaults(ScenarioKind::HighDimCorrect), two},
                   {"contaminated", ScenarioConfig::defaults(ScenarioKind::HighDimContaminated), two}};
    } else if (name == "table5") {
        const std::vector<EstimatorSpec> est{EstimatorSpec::mle(), EstimatorSpec::mcde(DivergenceSpec::beta(0.1)),
                                             EstimatorSpec::mcde(DivergenceSpec::beta(1.0)),
                                             EstimatorSpec::opt_beta(CvConfig{})};
        ScenarioConfig correct = ScenarioConfig::defaults(ScenarioKind::CvStudy);
        correct.pi = 0.0;
        s.parts = {{"correct", correct, est},
                   {"misspecified", ScenarioConfig::defaults(ScenarioKind::CvStudy), est}};
    } else {
        throw UsageError("unknown study '" + std::string(name) + "' (expected table2, table3, table3b, table4, table5)");
    }
    return s;
}

/// Runs every part of a study; part p uses master seed derive_seed(seed, p).
inline std::vector<MetricsTable> run_study(const Study& s, std::size_t reps, std::uint64_t seed,
                                           std::size_t threads = default_threads()) {
    std::vector<MetricsTable> out;
    for (std::size_t p = 0; p < s.parts.size(); ++p) {
        out.push_back(run_experiment(s.parts[p].scenario, s.parts[p].estimators, reps, derive_seed(seed, p), threads));
    }
    return out;
}

inline void write_study_csv(std::ostream& os, const Study& s, const std::vector<MetricsTable>& tables) {
    os << kMetricsCsvHeader << '\n';
    for (std::size_t p = 0; p < tables.size(); ++p) {
        const std::string prefix = s.parts.size() > 1 ? s.parts[p].label + "/" : std::string();
        write_metrics_csv(os, tables[p], prefix);
    }
}

}  // namespace mcde
