#pragma once

#include <map>
#include <string>
#include <vector>

#include "fwreg/sim/replications.hpp"

namespace fwreg::sim {

struct SlopeFit {
    double slope = 0.0;
    double se = 0.0;
    double intercept = 0.0;
    int points = 0;
};

// OLS of log2(mean MSE) on log2(n) over replication-averaged points.
SlopeFit rate_slope(const std::vector<ReplicationResult>& results, int min_replications = 20);

// Grouped by estimator name.
std::map<std::string, SlopeFit> rate_slopes(const std::vector<ReplicationResult>& results,
                                            int min_replications = 20);

}  // namespace fwreg::sim
