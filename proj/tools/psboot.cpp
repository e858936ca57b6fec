#include "psboot/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv)
{
    using namespace psboot::cli;

    CLI::App app{"Partially standardized bootstrap for max statistics"};
    app.footer(schema_help());
    app.require_subcommand(1);

    RunConfig cfg;
    std::uint64_t seed = 0;
    std::string threads = "1";

    const std::map<std::string, std::string> about{
        {"gen-data", "simulate a sample from a covariance model"},
        {"sci", "simultaneous confidence intervals for the mean of a CSV sample"},
        {"fda-experiment", "rejection rate of the Fourier-coefficient mean test"},
        {"multinomial-experiment", "coverage of restricted intervals for cell proportions"},
        {"rate-study", "Kolmogorov distance of the bootstrap across sample sizes"},
        {"diagnostics", "variance-decay diagnostics of a model or sample"},
    };
    for (const std::string& name : commands()) {
        CLI::App* sub = app.add_subcommand(name, about.count(name) ? about.at(name) : "");
        sub->add_option("--config", cfg.config_path, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", cfg.out_dir, "output directory (created if missing)")->required();
        auto* seed_opt = sub->add_option("--seed", seed, "master seed");
        if (is_stochastic(name)) seed_opt->required();
        sub->add_option("--threads", threads, "worker threads, a count or \"auto\"")->default_val("1");
        sub->callback([&cfg, name] { cfg.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    if (threads == "auto") {
        cfg.threads = 0;
    } else {
        try {
            std::size_t used = 0;
            const long long t = std::stoll(threads, &used);
            if (used != threads.size() || t < 1) throw std::invalid_argument("threads");
            cfg.threads = static_cast<std::size_t>(t);
        } catch (const std::exception&) {
            std::cerr << "error: --threads must be a positive count or \"auto\"\n";
            return kExitValidation;
        }
    }
    for (const auto* sub : app.get_subcommands())
        if (sub->count("--seed") > 0) cfg.seed = seed;

    return run(cfg);
}
