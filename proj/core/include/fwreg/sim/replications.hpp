#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fwreg/basis.hpp"
#include "fwreg/sim/dgp.hpp"

namespace fwreg::sim {

struct ExperimentConfig {
    DgpKind dgp = DgpKind::kennedy;
    std::vector<std::string> estimators{"fw"};
    std::vector<int> n_grid{2000};
    // Propensity corruption rates; used by the CATE designs only.
    std::vector<double> alpha_grid{0.3};
    int replications = 10;
    int K = 5;
    double split_fraction = 0.5;
    std::vector<int> J_grid;  // empty: 1..min(fit part / 2, max-J, J_max)
    int J_max = 0;            // 0: no cap beyond the basis
    BasisSpec basis{.family = Family::bspline, .domain = {}};
    double smooth_alpha = 2.0;
    double spline_df = 0.0;  // 0: GCV
    int test_size = 500;
    std::uint64_t seed = 0;
    int threads = 1;
    bool timing = false;
    bool keep_errors = false;
};

struct ReplicationResult {
    std::string estimator;
    int n = 0;
    double alpha = 0.0;
    int replication = 0;
    std::vector<double> squared_errors;  // kept when keep_errors is set
    double mse = 0.0;
    double J = 0.0;                      // mean CV-selected J; 0 when not a series fit
    double seconds = 0.0;
};

const std::vector<std::string>& estimator_registry();

// Estimators that apply to a design; anything else is a registry error.
bool estimator_applies(DgpKind kind, const std::string& name);

std::vector<ReplicationResult> run_replications(const ExperimentConfig& config);

// One replication at one sample size, every alpha and estimator.
std::vector<ReplicationResult> run_single(const ExperimentConfig& config, int n, int replication);

}  // namespace fwreg::sim
