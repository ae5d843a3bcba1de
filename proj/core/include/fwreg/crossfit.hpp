#pragma once

#include <cstdint>
#include <vector>

#include "fwreg/basis.hpp"
#include "fwreg/fw.hpp"
#include "fwreg/plans.hpp"

namespace fwreg {

struct CrossfitOptions {
    int n_folds = 2;
    std::uint64_t seed = 0;
    std::vector<int> folds;   // explicit fold label per record; empty: random balanced folds
    int min_train = 10;       // smallest complement a nuisance fit is attempted on
    Method method = Method::fw;
};

struct CrossfitResult {
    AveragedPredictor predictor;
    std::vector<int> folds;
    std::vector<double> pseudo;   // each record's pseudo-outcome from its own fold
};

CrossfitResult crossfit(const std::vector<ObservedRecord>& records, const PseudoPlan& plan,
                        const BasisSequence& basis, int J, const CrossfitOptions& options = {});

std::vector<int> random_folds(std::size_t n, int n_folds, std::uint64_t seed);

}  // namespace fwreg
