#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_common(CLI::App* app, fwreg::cli::Flags& f) {
    app->add_option("--config", f.config, "JSON configuration file");
    app->add_option("--seed", f.seed, "master seed");
    app->add_option("--out", f.out, "output directory");
    app->add_option("--threads", f.threads, "worker threads (default: FWREG_THREADS, then 1)");
    app->add_option("--setting", f.setting, "fulldata|mar|shadow|cate|proximal|dose|iv");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forster-Warmuth series regression and counterfactual learners"};
    app.require_subcommand(1);
    fwreg::cli::Flags flags;

    CLI::App* fit = app.add_subcommand("fit", "fit a counterfactual regression to a CSV dataset");
    add_common(fit, flags);
    fit->add_option("dataset", flags.data, "dataset CSV");
    CLI::App* simulate = app.add_subcommand("simulate", "run a simulation study");
    add_common(simulate, flags);
    CLI::App* rates = app.add_subcommand("rates", "fit log-log MSE slopes over a sample-size grid");
    add_common(rates, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) {
            fwreg::cli::run_fit(fwreg::cli::load_fit_config(flags), std::cout);
        } else if (simulate->parsed()) {
            fwreg::cli::run_simulate(fwreg::cli::load_simulate_config(flags, false));
        } else {
            fwreg::cli::run_rates(fwreg::cli::load_simulate_config(flags, true));
        }
    } catch (const fwreg::Error& e) {
        std::cerr << "fwreg: " << e.what() << "\n";
        return fwreg::cli::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "fwreg: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
