#include "fwreg/cv.hpp"

#include <algorithm>
#include <numeric>

#include "fwreg/error.hpp"
#include "fwreg/rng.hpp"

namespace fwreg {

std::vector<int> default_J_grid(int fit_size, int max_J) {
    int top = std::max(1, std::min(fit_size / 2, max_J));
    std::vector<int> g(static_cast<std::size_t>(top));
    std::iota(g.begin(), g.end(), 1);
    return g;
}

namespace {

FWModel fit_rows(const Matrix& design, const Vector& y, const std::vector<int>& index) {
    Matrix d(static_cast<Eigen::Index>(index.size()), design.cols());
    Vector r(static_cast<Eigen::Index>(index.size()));
    for (std::size_t i = 0; i < index.size(); ++i) {
        d.row(static_cast<Eigen::Index>(i)) = design.row(index[i]);
        r(static_cast<Eigen::Index>(i)) = y(index[i]);
    }
    return FWModel::fit(d, r);
}

double model_predict(const FWModel& m, const Vector& phi, Method method) {
    return method == Method::fw ? predict(m, phi) : predict_ls(m, phi);
}

}  // namespace

SeriesPredictor fit_series(const Matrix& design, const Vector& responses, const std::vector<int>& index,
                           const BasisSequence& basis, Method method) {
    return SeriesPredictor(basis, static_cast<int>(design.cols()), fit_rows(design, responses, index), method);
}

CVResult select_J_cv(const RowMatrix& covariates, const Vector& responses, const BasisSequence& basis,
                     const CVOptions& opt) {
    Eigen::Index n = covariates.rows();
    if (responses.size() != n) raise(ErrorCode::shape, "covariate and response counts differ");
    if (opt.K < 1) raise(ErrorCode::split, "K must be >= 1");
    if (!(opt.split_fraction > 0.0 && opt.split_fraction < 1.0))
        raise(ErrorCode::split, "split fraction must lie in (0,1)");
    int n_fit = static_cast<int>(std::floor(opt.split_fraction * static_cast<double>(n)));
    int n_val = static_cast<int>(n) - n_fit;
    if (n_fit < 1) raise(ErrorCode::split, "fit part is empty");
    if (n_val < 1) raise(ErrorCode::split, "validation part is empty");

    CVResult res;
    res.J_grid = opt.J_grid.empty() ? default_J_grid(n_fit, basis.max_J()) : opt.J_grid;
    std::sort(res.J_grid.begin(), res.J_grid.end());
    res.J_grid.erase(std::unique(res.J_grid.begin(), res.J_grid.end()), res.J_grid.end());
    for (int J : res.J_grid)
        if (J < 1 || J > basis.max_J())
            raise(ErrorCode::truncation, "grid value J=" + std::to_string(J) + " outside [1, " +
                                             std::to_string(basis.max_J()) + "]");

    std::vector<std::vector<int>> fits, vals;
    for (int k = 0; k < opt.K; ++k) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng = make_rng(opt.seed, static_cast<std::uint64_t>(k));
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> fit(perm.begin(), perm.begin() + n_fit);
        std::vector<int> val(perm.begin() + n_fit, perm.end());
        std::sort(fit.begin(), fit.end());
        std::sort(val.begin(), val.end());
        fits.push_back(std::move(fit));
        vals.push_back(std::move(val));
    }

    // One design in memory at a time.
    res.loss.assign(static_cast<std::size_t>(opt.K), std::vector<double>(res.J_grid.size()));
    for (std::size_t g = 0; g < res.J_grid.size(); ++g) {
        Matrix design = basis.evaluate_matrix(res.J_grid[g], covariates);
        for (std::size_t k = 0; k < fits.size(); ++k) {
            FWModel m = fit_rows(design, responses, fits[k]);
            double loss = 0.0;
            for (int i : vals[k]) {
                double e = model_predict(m, design.row(i).transpose(), opt.method) - responses(i);
                loss += e * e;
            }
            res.loss[k][g] = loss / static_cast<double>(vals[k].size());
        }
    }

    for (std::size_t k = 0; k < fits.size(); ++k) {
        const std::vector<double>& losses = res.loss[k];
        std::size_t best = 0;
        for (std::size_t g = 1; g < losses.size(); ++g)
            if (losses[g] < losses[best]) best = g;
        int J = res.J_grid[best];
        res.selected_J.push_back(J);
        res.predictor.add(
            SeriesPredictor(basis, J, fit_rows(basis.evaluate_matrix(J, covariates), responses, fits[k]), opt.method));
        res.fit_index.push_back(std::move(fits[k]));
    }
    return res;
}

}  // namespace fwreg
