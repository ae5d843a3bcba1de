#include "fwreg/crossfit.hpp"

#include <algorithm>
#include <numeric>

#include "fwreg/error.hpp"
#include "fwreg/rng.hpp"

namespace fwreg {

std::vector<int> random_folds(std::size_t n, int n_folds, std::uint64_t seed) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> folds(n);
    for (std::size_t i = 0; i < n; ++i) folds[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(n_folds));
    return folds;
}

CrossfitResult crossfit(const std::vector<ObservedRecord>& records, const PseudoPlan& plan,
                        const BasisSequence& basis, int J, const CrossfitOptions& opt) {
    if (opt.n_folds < 2) raise(ErrorCode::fold_size, "cross-fitting needs at least 2 folds");
    CrossfitResult res;
    res.folds = opt.folds.empty() ? random_folds(records.size(), opt.n_folds, opt.seed) : opt.folds;
    if (res.folds.size() != records.size()) raise(ErrorCode::shape, "one fold label per record is required");
    for (int f : res.folds)
        if (f < 0 || f >= opt.n_folds) raise(ErrorCode::shape, "fold label out of range");
    res.pseudo.assign(records.size(), 0.0);

    for (int f = 0; f < opt.n_folds; ++f) {
        std::vector<ObservedRecord> train;
        std::vector<std::size_t> held;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (res.folds[i] == f)
                held.push_back(i);
            else
                train.push_back(records[i]);
        }
        int need = plan.setting == Setting::fulldata && !plan.custom ? 0 : opt.min_train;
        if (held.empty() || static_cast<int>(train.size()) < need)
            raise(ErrorCode::fold_size, "fold " + std::to_string(f) + " has " + std::to_string(held.size()) +
                                            " records and a complement of " + std::to_string(train.size()));
        NuisanceSet nu;
        try {
            nu = fit_nuisances(plan, train, derive_seed(opt.seed, static_cast<std::uint64_t>(f) + 1));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::fit || e.code() == ErrorCode::separation ||
                e.code() == ErrorCode::under_identified || e.code() == ErrorCode::degenerate_knots)
                raise(ErrorCode::fold_size, "nuisance fit on the complement of fold " + std::to_string(f) +
                                                " failed: " + e.what());
            throw;
        }
        Matrix design(static_cast<Eigen::Index>(held.size()), J);
        Vector y(static_cast<Eigen::Index>(held.size()));
        for (std::size_t k = 0; k < held.size(); ++k) {
            const ObservedRecord& rec = records[held[k]];
            std::vector<double> x = target_covariates(rec);
            design.row(static_cast<Eigen::Index>(k)) = basis.evaluate(J, Point(x.data(), x.size())).transpose();
            y(static_cast<Eigen::Index>(k)) = plan_pseudo(plan, rec, nu);
            res.pseudo[held[k]] = y(static_cast<Eigen::Index>(k));
        }
        res.predictor.add(SeriesPredictor(basis, J, FWModel::fit(design, y), opt.method));
    }
    return res;
}

}  // namespace fwreg
