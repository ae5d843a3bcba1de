#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fwreg/basis.hpp"
#include "fwreg/fw.hpp"
#include "fwreg/nuisance.hpp"
#include "fwreg/pseudo.hpp"
#include "fwreg/records.hpp"
#include "fwreg/sim/replications.hpp"

namespace fwreg::cli {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<std::string> setting;
    std::optional<std::string> data;  // fit: positional dataset path
};

// Column roles. Empty roles are inferred from the header when the schema is not given.
struct Schema {
    std::vector<std::string> x, z, w, l;
    std::string y, r, a;
    bool given = false;
};

struct FitConfig {
    Setting setting = Setting::fulldata;
    bool setting_given = false;
    std::string data;
    Schema schema;
    std::string predict_at;  // empty: the dataset's own covariates
    BasisSpec basis{.family = Family::bspline, .domain = {}};
    std::vector<int> J_grid;
    int J_max = 0;  // 0: no cap beyond the basis
    int K = 5;
    double split_fraction = 0.5;
    Method method = Method::fw;
    int n_folds = 2;
    Link link = Link::identity;
    RegressionMethod outcome_method = RegressionMethod::smoothing_spline;
    double spline_df = 5.0;
    int bridge_J = 4;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = ".";
};

struct SimulateConfig {
    sim::ExperimentConfig experiment;
    std::string baseline = "fw";
    int min_replications = 20;
    std::string results_in;  // rates: read this results table instead of simulating
    std::string out = ".";
};

FitConfig load_fit_config(const Flags& flags);
SimulateConfig load_simulate_config(const Flags& flags, bool rates);

// flag, then FWREG_THREADS, then the file value.
int resolve_threads(const std::optional<int>& flag, int file_value);

}  // namespace fwreg::cli
