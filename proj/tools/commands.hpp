#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"
#include "fwreg/error.hpp"
#include "fwreg/records.hpp"
#include "fwreg/sim/replications.hpp"

namespace fwreg::cli {

struct LoadedData {
    std::vector<ObservedRecord> records;
    std::vector<std::string> target_columns;  // x columns, or the treatment column for dose-response
};

LoadedData load_records(const Table& table, Setting setting, const Schema& schema);

void run_fit(const FitConfig& config, std::ostream& summary);
void run_simulate(const SimulateConfig& config);
void run_rates(const SimulateConfig& config);

std::string results_csv(const std::vector<sim::ReplicationResult>& results);
std::string ratios_csv(const std::vector<sim::ReplicationResult>& results, const std::vector<std::string>& estimators,
                       const std::string& baseline);
std::vector<sim::ReplicationResult> parse_results(const Table& table);

int exit_code(ErrorCode code);

}  // namespace fwreg::cli
