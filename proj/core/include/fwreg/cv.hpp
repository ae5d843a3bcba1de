#pragma once

#include <cstdint>
#include <vector>

#include "fwreg/basis.hpp"
#include "fwreg/fw.hpp"

namespace fwreg {

struct CVOptions {
    std::vector<int> J_grid;  // empty: 1..min(fit size / 2, max-J)
    int K = 5;
    double split_fraction = 0.5;
    std::uint64_t seed = 0;
    Method method = Method::fw;
};

struct CVResult {
    std::vector<int> selected_J;             // one per repeat
    std::vector<int> J_grid;
    std::vector<std::vector<double>> loss;   // [repeat][grid index]
    std::vector<std::vector<int>> fit_index; // fit part of each repeat
    AveragedPredictor predictor;
};

std::vector<int> default_J_grid(int fit_size, int max_J);

CVResult select_J_cv(const RowMatrix& covariates, const Vector& responses, const BasisSequence& basis,
                     const CVOptions& options);

// Fit on rows `index` only.
SeriesPredictor fit_series(const Matrix& design, const Vector& responses, const std::vector<int>& index,
                           const BasisSequence& basis, Method method);

}  // namespace fwreg
