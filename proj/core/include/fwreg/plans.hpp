#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fwreg/nuisance.hpp"
#include "fwreg/pseudo.hpp"
#include "fwreg/records.hpp"

namespace fwreg {

struct NuisanceRecipe {
    RegressionSpec outcome;
    PropensitySpec propensity;
    BasisSpec bridge_basis;          // sieves for bridge functions
    int bridge_J = 4;
    int bridge_M = 0;                // 0: 2 * bridge_J
    std::vector<double> lambda_grid = default_lambda_grid();
    ExtendedPropensitySpec extended;
    double clip = 0.01;
};

using NuisanceFitter = std::function<NuisanceSet(std::span<const ObservedRecord>, std::uint64_t seed)>;

struct PseudoPlan {
    Setting setting = Setting::fulldata;
    Link link = Link::identity;
    NuisanceRecipe recipe;
    NuisanceFitter custom;           // replaces the recipe when set
};

NuisanceSet fit_nuisances(const PseudoPlan& plan, std::span<const ObservedRecord> train, std::uint64_t seed);

double plan_pseudo(const PseudoPlan& plan, const ObservedRecord& rec, const NuisanceSet& nu);

RowMatrix stack_rows(const std::vector<std::vector<double>>& rows);

}  // namespace fwreg
