#include "psboot/cli.hpp"

#include "psboot/error.hpp"
#include "psboot/io.hpp"
#include "psboot/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iostream>
#include <memory>
#include <set>
#include <thread>

#ifndef PSBOOT_VERSION
#define PSBOOT_VERSION "dev"
#endif

namespace psboot::cli {

namespace fs = std::filesystem;
using io::Json;

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"gen-data",        "sci",        "fda-experiment", "multinomial-experiment",
                                                "rate-study", "diagnostics"};
    return names;
}

bool is_stochastic(const std::string& command) { return command != "diagnostics"; }

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* where)
{
    if (!j.is_object()) throw ValidationError(std::string(where) + ": expected an object");
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
        if (!known) throw ValidationError(std::string(where) + ": unknown field '" + item.key() + "'");
    }
}

template <class T>
T field(const Json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T required(const Json& j, const char* key)
{
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    return field<T>(j, key, T{});
}

/// "select" or a number; nullopt means select.
std::optional<double> tau_field(const Json& j, double fallback)
{
    if (!j.contains("tau")) return fallback;
    const Json& t = j.at("tau");
    if (t.is_string()) {
        if (t.get<std::string>() != "select") throw ValidationError("tau must be a number or \"select\"");
        return std::nullopt;
    }
    if (!t.is_number()) throw ValidationError("tau must be a number or \"select\"");
    return t.get<double>();
}

std::optional<double> tau_field_select_default(const Json& j)
{
    if (!j.contains("tau")) return std::nullopt;
    return tau_field(j, 0.0);
}

std::vector<double> grid_field(const Json& j)
{
    return j.contains("tau_grid") ? field<std::vector<double>>(j, "tau_grid", {}) : default_tau_grid();
}

Eigen::VectorXd vector_field(const Json& j, const char* key, std::size_t p, double fallback)
{
    if (!j.contains(key)) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p), fallback);
    const Json& v = j.at(key);
    if (v.is_number()) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p), v.get<double>());
    const auto values = field<std::vector<double>>(j, key, {});
    if (values.size() != p) throw ValidationError(std::string("field '") + key + "' has wrong length");
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(p));
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_relative() ? base / p : p; }

struct Context {
    const RunConfig& run;
    const Json& config;
    fs::path base;
    std::uint64_t seed = 0;
    const Executor& exec;
};

void cmd_gen_data(const Context& c)
{
    check_keys(c.config, {"model", "n", "mu", "noise"}, "gen-data");
    const CovarianceModel model = io::model_from_json(required<Json>(c.config, "model"));
    const auto n = required<std::size_t>(c.config, "n");
    const Eigen::VectorXd mu = vector_field(c.config, "mu", model.p(), 0.0);
    const Noise noise = noise_from_string(field<std::string>(c.config, "noise", "gaussian"));
    io::write_sample_csv(c.run.out_dir / "data.csv", generate_sample(mu, model, n, noise, c.seed));
}

void cmd_sci(const Context& c)
{
    check_keys(c.config, {"data", "tau", "tau_grid", "B", "rho", "mu0"}, "sci");
    const SampleMatrix x = io::read_sample_csv(resolve(c.base, required<std::string>(c.config, "data")));
    const auto B = field<std::size_t>(c.config, "B", kDefaultB);
    const auto rho = field<double>(c.config, "rho", 0.05);
    const std::optional<double> tau = tau_field(c.config, 0.5);

    SciSet sci;
    Json summary;
    if (tau) {
        sci = build_sci(x, *tau, B, rho, c.seed, c.exec);
        summary = io::sci_json(sci);
    } else {
        const std::vector<double> grid = grid_field(c.config);
        TauSelection sel = select_tau(x, grid, B, rho, c.seed, c.exec);
        sci = std::move(sel.sci);
        summary = io::sci_json(sci);
        summary["tau_grid"] = grid;
        summary["mean_widths"] = sel.mean_widths;
    }
    const BootstrapDraws draws = bootstrap_draws(x, sci.tau, B, c.seed, c.exec);

    if (c.config.contains("mu0")) {
        const Eigen::VectorXd mu0 = vector_field(c.config, "mu0", x.p(), 0.0);
        std::vector<std::size_t> offending;
        for (std::size_t k : uncovered(sci, mu0)) offending.push_back(sci.coords[k] + 1);
        io::write_json(c.run.out_dir / "test.json",
                       Json{{"reject", !offending.empty()}, {"offending", offending}, {"tau", sci.tau}});
    }
    io::write_text(c.run.out_dir / "sci.csv", io::sci_csv(sci));
    io::write_json(c.run.out_dir / "sci.json", summary);
    io::write_text(c.run.out_dir / "draws.csv", io::draws_csv(draws));
    io::write_json(c.run.out_dir / "draws.json", io::draws_sidecar(draws));
}

void cmd_fda(const Context& c)
{
    check_keys(c.config, {"n", "p", "B", "rho", "tau", "tau_grid", "n_sims", "alternative", "nu", "grid_size"},
               "fda-experiment");
    fda::FdaExperimentConfig cfg;
    cfg.n = field(c.config, "n", cfg.n);
    cfg.p = field(c.config, "p", cfg.p);
    cfg.B = field(c.config, "B", cfg.B);
    cfg.rho = field(c.config, "rho", cfg.rho);
    cfg.fixed_tau = tau_field_select_default(c.config);
    cfg.tau_grid = grid_field(c.config);
    cfg.n_sims = field(c.config, "n_sims", cfg.n_sims);
    cfg.nu = field(c.config, "nu", cfg.nu);
    cfg.grid_size = field(c.config, "grid_size", cfg.grid_size);
    if (c.config.contains("alternative")) {
        const Json& a = c.config.at("alternative");
        check_keys(a, {"omega", "rho", "theta"}, "alternative");
        cfg.alternative = {field(a, "omega", 0.0), field(a, "rho", 0.0), field(a, "theta", 0.0)};
    }
    cfg.seed = c.seed;
    const fda::FdaReport report = fda::run_fda_experiment(cfg, c.exec);
    io::write_text(c.run.out_dir / "sims.csv", io::fda_sims_csv(report));
    io::write_json(c.run.out_dir / "report.json", io::fda_report_json(report));
}

multinomial::CellFilterRule rule_field(const Json& j)
{
    if (!j.contains("rule")) return multinomial::rule::MinCount{5};
    const Json& r = j.at("rule");
    const std::string kind = r.is_string() ? r.get<std::string>() : required<std::string>(r, "kind");
    if (kind == "theoretical") return multinomial::rule::Theoretical{};
    if (kind == "min_count") {
        multinomial::rule::MinCount m;
        if (r.is_object()) {
            check_keys(r, {"kind", "threshold"}, "rule");
            m.threshold = field(r, "threshold", m.threshold);
        }
        return m;
    }
    throw ValidationError("unknown cell filter rule '" + kind + "'");
}

void cmd_multinomial(const Context& c)
{
    check_keys(c.config, {"model", "n", "B", "rho", "tau", "tau_grid", "rule", "n_sims"}, "multinomial-experiment");
    multinomial::ExperimentConfig cfg;
    cfg.pi = io::multinomial_model_from_json(required<Json>(c.config, "model"), c.base).pi();
    cfg.n = field(c.config, "n", cfg.n);
    cfg.B = field(c.config, "B", cfg.B);
    cfg.rho = field(c.config, "rho", cfg.rho);
    cfg.fixed_tau = tau_field_select_default(c.config);
    cfg.tau_grid = grid_field(c.config);
    cfg.rule = rule_field(c.config);
    cfg.n_sims = field(c.config, "n_sims", cfg.n_sims);
    cfg.seed = c.seed;
    const multinomial::ExperimentReport report = multinomial::run_multinomial_experiment(cfg, c.exec);
    io::write_text(c.run.out_dir / "sims.csv", io::multinomial_sims_csv(report));
    io::write_json(c.run.out_dir / "report.json", io::multinomial_report_json(report));
}

void cmd_rate(const Context& c)
{
    check_keys(c.config, {"sigma", "corr", "p", "ns", "tau", "noise", "ref_draws", "outer_reps", "B"}, "rate-study");
    ratelab::RateStudyConfig cfg;
    if (c.config.contains("sigma")) {
        const Json& s = c.config.at("sigma");
        check_keys(s, {"kind", "c", "alpha"}, "sigma");
        if (field<std::string>(s, "kind", "power") != "power") throw ValidationError("sigma kind must be power");
        cfg.sigma_c = field(s, "c", cfg.sigma_c);
        cfg.alpha = field(s, "alpha", cfg.alpha);
    }
    if (c.config.contains("corr")) cfg.corr = io::correlation_from_json(c.config.at("corr"));
    if (c.config.contains("p")) {
        const Json& p = c.config.at("p");
        if (p.is_number_integer()) {
            cfg.p_rule = ratelab::prule::Fixed{p.get<std::size_t>()};
        } else {
            check_keys(p, {"c", "exponent"}, "p");
            cfg.p_rule = ratelab::prule::Power{required<double>(p, "c"), required<double>(p, "exponent")};
        }
    }
    cfg.ns = field(c.config, "ns", cfg.ns);
    cfg.tau = field(c.config, "tau", cfg.tau);
    cfg.noise = noise_from_string(field<std::string>(c.config, "noise", to_string(cfg.noise)));
    cfg.ref_draws = field(c.config, "ref_draws", cfg.ref_draws);
    cfg.outer_reps = field(c.config, "outer_reps", cfg.outer_reps);
    cfg.B = field(c.config, "B", cfg.B);
    cfg.seed = c.seed;
    const ratelab::RateStudyResult result = ratelab::run_rate_study(cfg, c.exec);
    io::write_text(c.run.out_dir / "rate.csv", io::rate_csv(result));
    io::write_json(c.run.out_dir / "rate.json", io::rate_json(result));
}

void cmd_diagnostics(const Context& c)
{
    const Json& j = c.config;
    EllChoice ell;
    ell.a = field(j, "a", ell.a);
    if (j.contains("ell")) ell.ell_override = required<std::size_t>(j, "ell");
    DecayDiagnostics d;
    if (j.contains("data")) {
        check_keys(j, {"data", "n", "a", "ell"}, "diagnostics");
        ell.n = field<std::size_t>(j, "n", 0);
        d = decay_diagnostics(io::read_sample_csv(resolve(c.base, required<std::string>(j, "data"))), ell);
    } else if (j.contains("model")) {
        check_keys(j, {"model", "n", "a", "ell"}, "diagnostics");
        ell.n = field<std::size_t>(j, "n", 100);
        d = decay_diagnostics(io::model_from_json(j.at("model")), ell);
    } else {
        check_keys(j, {"p", "sigma", "corr", "n", "a", "ell"}, "diagnostics");
        ell.n = field<std::size_t>(j, "n", 100);
        Json model = j;
        for (const char* k : {"n", "a", "ell"}) model.erase(k);
        d = decay_diagnostics(io::model_from_json(model), ell);
    }
    io::write_json(c.run.out_dir / "diagnostics.json", io::diagnostics_json(d));
}

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& err)
{
    const auto& names = commands();
    if (std::find(names.begin(), names.end(), cfg.command) == names.end()) {
        err << "unknown command '" << cfg.command << "'\nusage: psboot <command> --config <path> --out <dir> "
            << "[--seed <u64>] [--threads <n|auto>]\ncommands:";
        for (const auto& n : names) err << ' ' << n;
        err << '\n';
        return kExitValidation;
    }

    const auto started = std::chrono::steady_clock::now();
    const std::string started_at = utc_now();
    try {
        if (is_stochastic(cfg.command) && !cfg.seed) throw ValidationError(cfg.command + " requires --seed");
        const Json config = io::read_json(cfg.config_path);
        std::error_code ec;
        fs::create_directories(cfg.out_dir, ec);
        if (ec || !fs::is_directory(cfg.out_dir))
            throw ValidationError("cannot create output directory " + cfg.out_dir.string());

        const std::size_t threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
        std::unique_ptr<Executor> pool;
        if (threads > 1) pool = std::make_unique<ThreadPool>(threads);
        const Executor& exec = pool ? *pool : serial_executor();

        const fs::path manifest = cfg.out_dir / "manifest.json";
        fs::remove(manifest, ec);

        const Context ctx{cfg, config, cfg.config_path.parent_path(), cfg.seed.value_or(0), exec};
        if (cfg.command == "gen-data") cmd_gen_data(ctx);
        else if (cfg.command == "sci") cmd_sci(ctx);
        else if (cfg.command == "fda-experiment") cmd_fda(ctx);
        else if (cfg.command == "multinomial-experiment") cmd_multinomial(ctx);
        else if (cfg.command == "rate-study") cmd_rate(ctx);
        else cmd_diagnostics(ctx);

        const double duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        Json m{{"command", cfg.command},
               {"config", config},
               {"seed", cfg.seed ? Json(*cfg.seed) : Json(nullptr)},
               {"threads", threads},
               {"version", PSBOOT_VERSION},
               {"started_at", started_at},
               {"duration_s", duration}};
        io::write_json(manifest, m);
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

int run(const RunConfig& cfg) { return run(cfg, std::cerr); }

std::string schema_help()
{
    return R"(Config files are JSON. Relative paths resolve against the config file's directory.

gen-data -> data.csv
  model   {"p": 50, "sigma": [..] | {"kind": "power", "c": 1, "alpha": 0.7},
           "corr": {"kind": "identity"} | {"kind": "autoregressive", "rho0": 0.5}
                 | {"kind": "algebraic", "gamma": 2} | {"kind": "banded", "c0": 3}
                 | {"kind": "multinomial", "pi": [..]} | {"kind": "explicit", "matrix": [[..]]}}
           corr defaults to identity
  n       sample size (required)
  mu      number or array of length p (default 0)
  noise   gaussian | scaled-uniform | symmetric-exponential (default gaussian)

sci -> sci.csv, sci.json, draws.csv, draws.json [, test.json]
  data      CSV of observations, header 1..p (required)
  tau       number in [0, 1] or "select" (default 0.5)
  tau_grid  grid for "select" (default 0, 0.1, ..., 1)
  B         bootstrap draws (default 1000)
  rho       1 - confidence level (default 0.05)
  mu0       number or array; also test H0: mu = mu0

fda-experiment -> report.json, sims.csv
  n 50, p 100, B 1000, rho 0.05, tau "select", tau_grid 0..1, n_sims 1000,
  nu 0.1, grid_size 101, alternative {"omega": 0, "rho": 0, "theta": 0}

multinomial-experiment -> report.json, sims.csv
  model   {"kind": "zipf", "p": 1000, "eta": 1} | {"pi": [..]} | {"pi_csv": path} (required)
  n 500, B 500, rho 0.05, tau "select", tau_grid 0..1, n_sims 1000,
  rule {"kind": "min_count", "threshold": 5} | "theoretical"

rate-study -> rate.csv, rate.json
  sigma {"c": 1, "alpha": 0.7}, corr identity, p 500 | {"c": .., "exponent": ..},
  ns [100, 200, 400, 800], tau 0.8, noise symmetric-exponential,
  ref_draws 20000, outer_reps 50, B 2000 (ref_draws >= 10 B)

diagnostics -> diagnostics.json   (no seed needed)
  either a model object (fields as in gen-data) or {"model": {..}} or {"data": path}
  n   sample size for ell_n, k_n (default 100 for models, sample n for data)
  a   exponent in k_n (default 0.25)
  ell override for the size of the top-variance block
)";
}

}  // namespace psboot::cli
