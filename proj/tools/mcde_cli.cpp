#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mcde/mcde.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

struct Options {
    std::string family = "clayton";
    double theta = 0.5;
    double dof = 4.0;
    std::size_t d = 2;
    std::size_t n = 1000;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
    std::string data;
    std::string method = "beta";
    double exponent = 0.1;
    double x = 0.0;
    std::size_t mc = mcde::kDefaultCovarianceMc;
    double alpha = 0.5;
    std::size_t grid = 200;
    std::string cv_grid = "0.1,0.25,0.5,1";
    std::size_t k = 5;
    double anchor = 0.1;
    bool global_ranks = false;
    std::string scenario;
    std::string config;
    std::size_t reps = 0;
    std::size_t threads = 0;
};

void print_error(const std::string& kind, const std::string& message) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

mcde::CopulaFamily make_family(const Options& o, std::size_t d) {
    mcde::Family f;
    try {
        f = mcde::parse_family(o.family);
    } catch (const mcde::Error& e) {
        throw mcde::UsageError(e.what());
    }
    return {f, d, f == mcde::Family::StudentT ? o.dof : 0.0};
}

mcde::Copula make_copula(const Options& o, std::size_t d) {
    const mcde::CopulaFamily fam = make_family(o, d);
    if (fam.param_count() == 0) return {fam, {}};
    return {fam, {o.theta}};
}

// Opens `path` for writing, or returns std::cout when it is empty or "-".
std::ostream& open_out(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
    if (path.empty() || path == "-") return std::cout;
    holder = std::make_unique<std::ofstream>(path);
    if (!*holder) throw mcde::InputError("cannot open '" + path + "' for writing");
    return *holder;
}

mcde::PseudoSample load_pseudo(const std::string& path) {
    return mcde::pseudo_observations(mcde::read_csv_file(path).values);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw mcde::UsageError("--grid: '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw mcde::UsageError("--grid is empty");
    return out;
}

int cmd_sample(const Options& o) {
    const mcde::Copula c = make_copula(o, o.d);
    const mcde::RowMatrix m = mcde::sample(c, o.n, o.seed);
    std::unique_ptr<std::ofstream> f;
    mcde::write_csv(open_out(o.out, f), m);
    return 0;
}

int cmd_fit(const Options& o) {
    const mcde::PseudoSample u = load_pseudo(o.data);
    const mcde::CopulaFamily fam = make_family(o, u.d());
    mcde::FitResult r;
    if (o.method == "mle") {
        r = mcde::fit_mle(u, fam);
    } else {
        r = mcde::fit_mcde(u, fam, mcde::DivergenceSpec(mcde::parse_kind(o.method), o.exponent));
    }
    std::cout << mcde::to_json(r).dump(2) << std::endl;
    return 0;
}

int cmd_cov(const Options& o) {
    const mcde::CovarianceReport r = mcde::asymptotic_covariance(make_copula(o, 2), o.x, o.mc, o.seed);
    std::cout << mcde::to_json(r).dump(2) << std::endl;
    return 0;
}

int cmd_bounds(const Options& o) {
    const mcde::Copula c = make_copula(o, 2);
    const mcde::BoundednessReport r = mcde::power_bounded_sup(c, o.alpha, o.grid);
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw mcde::InputError("cannot open '" + o.out + "' for writing");
        mcde::write_surface_csv(f, mcde::surface_grid(c, o.alpha, o.grid));
    }
    std::cout << mcde::to_json(r).dump(2) << std::endl;
    return 0;
}

int cmd_cv(const Options& o) {
    const mcde::PseudoSample u = load_pseudo(o.data);
    mcde::CvConfig cfg;
    cfg.k = o.k;
    cfg.grid = parse_list(o.cv_grid);
    cfg.anchor_beta = o.anchor;
    cfg.seed = o.seed;
    cfg.global_ranks = o.global_ranks;
    const mcde::CvResult r = mcde::cv_select_exponent(u, make_family(o, u.d()), cfg);
    std::cout << mcde::to_json(r).dump(2) << std::endl;
    return 0;
}

int cmd_experiment(const Options& o) {
    mcde::Study study;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw mcde::InputError("cannot open '" + o.config + "'");
        std::stringstream text;
        text << in.rdbuf();
        study.name = o.config;
        study.parts = {{"custom", mcde::parse_scenario_config(text.str()), mcde::paper_study("table2").parts[0].estimators}};
    } else {
        study = mcde::paper_study(o.scenario);
    }
    const std::size_t reps = o.reps ? o.reps : study.default_reps;
    const std::size_t threads = o.threads ? o.threads : mcde::default_threads();
    const auto tables = mcde::run_study(study, reps, o.seed, threads);
    std::unique_ptr<std::ofstream> f;
    mcde::write_study_csv(open_out(o.out, f), study, tables);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimum copula divergence estimation"};
    app.require_subcommand(1);
    Options o;

    auto add_family = [&](CLI::App* sc, bool with_theta) {
        sc->add_option("--family", o.family, "clayton, gumbel, frank, joe, gaussian, t, independence")
            ->capture_default_str();
        sc->add_option("--dof", o.dof, "Student-t degrees of freedom")->capture_default_str();
        if (with_theta) sc->add_option("--theta", o.theta, "Copula parameter")->capture_default_str();
    };
    auto add_seed = [&](CLI::App* sc) {
        sc->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    };

    auto* sample = app.add_subcommand("sample", "Draw a sample from a copula and write it as CSV");
    add_family(sample, true);
    sample->add_option("--d", o.d, "Dimension")->capture_default_str();
    sample->add_option("--n", o.n, "Sample size")->capture_default_str();
    add_seed(sample);
    sample->add_option("--out", o.out, "Output CSV (default: stdout)");

    auto* fit = app.add_subcommand("fit", "Fit a copula to CSV data; prints FitResult JSON");
    fit->add_option("--data", o.data, "Input CSV with header")->required();
    add_family(fit, false);
    fit->add_option("--method", o.method, "mle, alpha, beta or gamma")
        ->check(CLI::IsMember({"mle", "alpha", "beta", "gamma"}))
        ->capture_default_str();
    fit->add_option("--exponent", o.exponent, "Divergence exponent")->capture_default_str();

    auto* cov = app.add_subcommand("cov", "Asymptotic sandwich covariance; prints JSON");
    add_family(cov, true);
    cov->add_option("--x", o.x, "Exponent x (0 for every alpha-MCDE)")->capture_default_str();
    cov->add_option("--mc", o.mc, "Monte Carlo draws")->capture_default_str();
    add_seed(cov);

    auto* bounds = app.add_subcommand("bounds", "Power-boundedness report; optional surface CSV");
    add_family(bounds, true);
    bounds->add_option("--alpha", o.alpha, "Weight exponent")->capture_default_str();
    bounds->add_option("--grid", o.grid, "Grid points per axis")->capture_default_str();
    bounds->add_option("--out", o.out, "Surface CSV path");

    auto* cv = app.add_subcommand("cv", "Cross-validated choice of the beta exponent; prints JSON");
    cv->add_option("--data", o.data, "Input CSV with header")->required();
    add_family(cv, false);
    cv->add_option("--grid", o.cv_grid, "Comma-separated candidate exponents")->capture_default_str();
    cv->add_option("--k", o.k, "Number of folds")->capture_default_str();
    cv->add_option("--anchor", o.anchor, "Anchor beta exponent")->capture_default_str();
    cv->add_flag("--global-ranks", o.global_ranks, "Train on global pseudo-observations");
    add_seed(cv);

    auto* exp = app.add_subcommand("experiment", "Run a simulation study; writes a metrics CSV");
    auto* scen = exp->add_option("--scenario", o.scenario, "table2, table3, table3b, table4 or table5");
    auto* conf = exp->add_option("--config", o.config, "Scenario file (key=value lines or JSON)");
    scen->excludes(conf);
    exp->add_option("--reps", o.reps, "Repetitions (default: the study's own)");
    add_seed(exp);
    exp->add_option("--threads", o.threads, "Worker threads (default: all cores)");
    exp->add_option("--out", o.out, "Output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
        if (exp->parsed() && o.scenario.empty() && o.config.empty()) {
            throw mcde::UsageError("experiment: one of --scenario or --config is required");
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 2;
    } catch (const mcde::UsageError& e) {
        print_error(e.kind(), e.what());
        return 2;
    }

    try {
        if (sample->parsed()) return cmd_sample(o);
        if (fit->parsed()) return cmd_fit(o);
        if (cov->parsed()) return cmd_cov(o);
        if (bounds->parsed()) return cmd_bounds(o);
        if (cv->parsed()) return cmd_cv(o);
        if (exp->parsed()) return cmd_experiment(o);
    } catch (const mcde::UsageError& e) {
        print_error(e.kind(), e.what());
        return 2;
    } catch (const mcde::Error& e) {
        print_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 1;
    }
    return 1;
}
