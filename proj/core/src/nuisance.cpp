#include "fwreg/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <variant>

#include "fwreg/cv.hpp"
#include "fwreg/error.hpp"
#include "fwreg/linalg.hpp"
#include "fwreg/rng.hpp"

namespace fwreg {

RegressionMethod parse_regression_method(const std::string& name) {
    if (name == "fw-series") return RegressionMethod::fw_series;
    if (name == "ls-series") return RegressionMethod::ls_series;
    if (name == "knn") return RegressionMethod::knn;
    if (name == "smoothing-spline") return RegressionMethod::smoothing_spline;
    raise(ErrorCode::config, "unknown regression method '" + name + "'");
}

std::string regression_method_name(RegressionMethod m) {
    switch (m) {
        case RegressionMethod::fw_series: return "fw-series";
        case RegressionMethod::ls_series: return "ls-series";
        case RegressionMethod::knn: return "knn";
        case RegressionMethod::smoothing_spline: return "smoothing-spline";
    }
    return "?";
}

namespace {

struct SeriesState {
    AveragedPredictor predictor;
    std::vector<int> selected;
};

struct KnnState {
    RowMatrix X;
    Vector y;
    int k = 1;
};

}  // namespace

struct Regressor::Impl {
    RegressionMethod method;
    std::variant<SeriesState, KnnState, SmoothingSpline> state;
};

double Regressor::predict(Point x) const {
    if (!impl_) raise(ErrorCode::fit, "regressor not fitted");
    if (const auto* s = std::get_if<SeriesState>(&impl_->state)) return s->predictor.predict(x);
    if (const auto* sp = std::get_if<SmoothingSpline>(&impl_->state)) return sp->predict(x);
    const auto& kn = std::get<KnnState>(impl_->state);
    if (static_cast<Eigen::Index>(x.size()) != kn.X.cols()) raise(ErrorCode::shape, "knn point dimension mismatch");
    std::vector<std::pair<double, Eigen::Index>> d(static_cast<std::size_t>(kn.X.rows()));
    for (Eigen::Index i = 0; i < kn.X.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < kn.X.cols(); ++j) {
            double e = kn.X(i, j) - x[static_cast<std::size_t>(j)];
            s += e * e;
        }
        d[static_cast<std::size_t>(i)] = {s, i};
    }
    std::partial_sort(d.begin(), d.begin() + kn.k, d.end());
    double s = 0.0;
    for (int i = 0; i < kn.k; ++i) s += kn.y(d[static_cast<std::size_t>(i)].second);
    return s / kn.k;
}

Evaluator Regressor::evaluator() const {
    Regressor self = *this;
    return [self](Point x) { return self.predict(x); };
}

RegressionMethod Regressor::method() const { return impl_->method; }

std::vector<int> Regressor::selected_J() const {
    if (const auto* s = std::get_if<SeriesState>(&impl_->state)) return s->selected;
    return {};
}

Regressor fit_regression(const RowMatrix& X, const Vector& y, const RegressionSpec& spec) {
    if (X.rows() != y.size()) raise(ErrorCode::shape, "regression covariates and responses differ in length");
    auto impl = std::make_shared<Regressor::Impl>();
    impl->method = spec.method;
    switch (spec.method) {
        case RegressionMethod::fw_series:
        case RegressionMethod::ls_series: {
            if (X.rows() < 2) raise(ErrorCode::fit, "series regression needs at least 2 observations");
            BasisSpec bs = spec.basis;
            bs.dim = static_cast<int>(X.cols());
            if (!bs.domain.empty() && static_cast<int>(bs.domain.size()) != bs.dim) bs.domain.clear();
            BasisSequence basis = make_basis(bs, X);
            CVOptions opt;
            opt.J_grid = spec.J_grid;
            opt.K = spec.cv_repeats;
            opt.split_fraction = spec.split_fraction;
            opt.seed = spec.seed;
            opt.method = spec.method == RegressionMethod::fw_series ? Method::fw : Method::ls;
            for (int& J : opt.J_grid) J = std::min(J, basis.max_J());
            CVResult cv = select_J_cv(X, y, basis, opt);
            impl->state = SeriesState{std::move(cv.predictor), std::move(cv.selected_J)};
            break;
        }
        case RegressionMethod::knn: {
            if (spec.k < 1) raise(ErrorCode::config, "knn needs k >= 1");
            if (X.rows() < spec.k)
                raise(ErrorCode::fit, "knn needs n >= k (n=" + std::to_string(X.rows()) + ", k=" +
                                          std::to_string(spec.k) + ")");
            impl->state = KnnState{X, y, spec.k};
            break;
        }
        case RegressionMethod::smoothing_spline:
            impl->state = SmoothingSpline::fit(X, y, spec.df);
            break;
    }
    return Regressor(std::move(impl));
}

double expit(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    double e = std::exp(v);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

PropensityModel fit_propensity(const RowMatrix& X, const std::vector<int>& labels, const PropensitySpec& spec) {
    if (X.rows() != static_cast<Eigen::Index>(labels.size()))
        raise(ErrorCode::shape, "propensity covariates and labels differ in length");
    int ones = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) raise(ErrorCode::shape, "propensity labels must be 0 or 1");
        ones += l;
    }
    if (ones == 0 || ones == static_cast<int>(labels.size()))
        raise(ErrorCode::separation, "propensity fit needs both labels present");

    PropensityModel m;
    BasisSpec bs = spec.basis;
    bs.dim = static_cast<int>(X.cols());
    if (!bs.domain.empty() && static_cast<int>(bs.domain.size()) != bs.dim) bs.domain.clear();
    m.basis_ = make_basis(bs, X);
    m.J_ = spec.J > 0 ? std::min(spec.J, m.basis_.max_J()) : std::min(1 + bs.dim, m.basis_.max_J());
    m.clip_ = spec.clip;
    Matrix F = m.basis_.evaluate_matrix(m.J_, X);
    Vector yv(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) yv(static_cast<Eigen::Index>(i)) = labels[i];

    Vector beta = Vector::Zero(m.J_);
    for (int it = 1; it <= spec.max_iter; ++it) {
        Vector eta = F * beta;
        Vector p(eta.size()), w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            p(i) = expit(eta(i));
            w(i) = p(i) * (1.0 - p(i));
        }
        Matrix H = F.transpose() * w.asDiagonal() * F;
        Vector step = SymmetricSpectrum(H).solve(Vector(F.transpose() * (yv - p)));
        beta += step;
        m.iterations_ = it;
        if (!step.allFinite() || !beta.allFinite()) {
            beta -= step;
            break;
        }
        if (step.cwiseAbs().maxCoeff() < spec.tol) {
            m.converged_ = true;
            break;
        }
    }
    m.coef_ = beta;
    return m;
}

double PropensityModel::linear_predictor(Point x) const { return basis_.evaluate(J_, x).dot(coef_); }

double PropensityModel::predict(Point x) const {
    return std::clamp(expit(linear_predictor(x)), clip_, 1.0 - clip_);
}

Evaluator PropensityModel::evaluator() const {
    PropensityModel self = *this;
    return [self](Point x) { return self.predict(x); };
}

Evaluator corrupt_propensity_with(Evaluator pi_true, double alpha, int n, double z, double clip) {
    if (!(alpha > 0.0)) raise(ErrorCode::config, "corruption rate alpha must be positive");
    if (n < 1) raise(ErrorCode::shape, "n must be >= 1");
    double scale = std::pow(static_cast<double>(n), -alpha);
    double eps = scale + scale * z;
    return [pi_true = std::move(pi_true), eps, clip](Point x) {
        double p = std::clamp(pi_true(x), 1e-12, 1.0 - 1e-12);
        return std::clamp(expit(logit(p) + eps), clip, 1.0 - clip);
    };
}

Evaluator corrupt_propensity(Evaluator pi_true, double alpha, int n, std::uint64_t seed, double clip) {
    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    return corrupt_propensity_with(std::move(pi_true), alpha, n, nd(rng), clip);
}

std::vector<double> default_lambda_grid() { return {0.0, 1e-6, 1e-4, 1e-2, 1.0}; }

namespace {

// Coordinates of P v in an orthonormal basis of the instrument column space.
struct Projected {
    Matrix A;  // r x J
    Vector c;  // r
    double largest = 0.0;
    int rank = 0;
};

Projected project(const Matrix& Phi, const Matrix& Psi, const Vector& t) {
    SymmetricSpectrum s(Phi.transpose() * Phi);
    Projected p;
    p.rank = s.rank();
    Matrix T(Phi.cols(), p.rank);
    int k = 0;
    for (Eigen::Index j = 0; j < s.eigenvalues().size(); ++j)
        if (s.in_range(j)) T.col(k++) = s.eigenvectors().col(j) / std::sqrt(s.eigenvalues()(j));
    p.A = T.transpose() * (Phi.transpose() * Psi);
    p.c = T.transpose() * (Phi.transpose() * t);
    if (p.A.cols() > 0 && p.A.rows() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(p.A.transpose() * p.A, Eigen::EigenvaluesOnly);
        p.largest = es.eigenvalues().maxCoeff();
    }
    return p;
}

Vector ridge(const Projected& p, double lambda) {
    Matrix H = p.A.transpose() * p.A;
    H.diagonal().array() += lambda;
    return SymmetricSpectrum(H).solve(Vector(p.A.transpose() * p.c));
}

Matrix take(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

Vector take(const Vector& v, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

}  // namespace

BridgeSolution fit_bridge_npiv(const Matrix& Phi, const Matrix& Psi, const Vector& t,
                               const std::vector<double>& lambda_grid, std::uint64_t seed) {
    Eigen::Index n = Phi.rows();
    if (Psi.rows() != n || t.size() != n) raise(ErrorCode::shape, "bridge inputs differ in row count");
    if (Psi.cols() < 1) raise(ErrorCode::shape, "bridge needs at least one endogenous feature");
    if (lambda_grid.empty()) raise(ErrorCode::grid, "lambda grid is empty");
    for (double l : lambda_grid)
        if (!(l >= 0.0)) raise(ErrorCode::grid, "lambda grid values must be nonnegative");

    BridgeSolution sol;
    sol.M = static_cast<int>(Phi.cols());
    sol.J = static_cast<int>(Psi.cols());
    Projected full = project(Phi, Psi, t);
    if (full.rank < sol.J)
        raise(ErrorCode::under_identified, "instrument rank " + std::to_string(full.rank) + " < J=" +
                                               std::to_string(sol.J));

    std::vector<double> grid = lambda_grid;
    std::sort(grid.begin(), grid.end());
    sol.lambda_candidates = grid;
    double factor = grid.front();
    if (grid.size() > 1) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(seed);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> fold[2];
        for (std::size_t i = 0; i < perm.size(); ++i) fold[i % 2].push_back(perm[i]);
        for (auto& f : fold) std::sort(f.begin(), f.end());
        sol.cv_loss.assign(grid.size(), 0.0);
        for (int f = 0; f < 2; ++f) {
            const std::vector<int>& tr = fold[f];
            const std::vector<int>& va = fold[1 - f];
            Projected ptr = project(take(Phi, tr), take(Psi, tr), take(t, tr));
            Projected pva = project(take(Phi, va), take(Psi, va), take(t, va));
            for (std::size_t g = 0; g < grid.size(); ++g) {
                Vector b = ridge(ptr, grid[g] * ptr.largest);
                sol.cv_loss[g] += (pva.c - pva.A * b).squaredNorm();
            }
        }
        std::size_t best = 0;
        for (std::size_t g = 1; g < grid.size(); ++g)
            if (sol.cv_loss[g] < sol.cv_loss[best]) best = g;
        factor = grid[best];
    }
    sol.lambda = factor * full.largest;
    sol.b = ridge(full, sol.lambda);
    double r2 = (full.c - full.A * sol.b).squaredNorm();
    sol.residual_norm = std::sqrt(r2);
    sol.objective = r2 + sol.lambda * sol.b.squaredNorm();
    return sol;
}

double bridge_objective(const Matrix& Phi, const Matrix& Psi, const Vector& t, const Vector& b, double lambda) {
    Eigen::ColPivHouseholderQR<Matrix> qr(Phi);
    qr.setThreshold(1e-10);
    Eigen::Index r = qr.rank();
    Matrix Q = qr.householderQ() * Matrix::Identity(Phi.rows(), r);
    Vector resid = t - Psi * b;
    Vector proj = Q.transpose() * resid;
    return proj.squaredNorm() + lambda * b.squaredNorm();
}

Sieve::Sieve(const BasisSpec& spec, const RowMatrix& training, int J) {
    BasisSpec bs = spec;
    bs.dim = static_cast<int>(training.cols());
    if (!bs.domain.empty() && static_cast<int>(bs.domain.size()) != bs.dim) bs.domain.clear();
    basis_ = make_basis(bs, training);
    if (J < 1 || J > basis_.max_J())
        raise(ErrorCode::truncation, "sieve size " + std::to_string(J) + " outside [1, " +
                                         std::to_string(basis_.max_J()) + "]");
    J_ = J;
}

Evaluator fit_extended_propensity(const std::vector<ShadowRecord>& records, const ExtendedPropensitySpec& spec) {
    if (records.empty()) raise(ErrorCode::fit, "no records");
    std::size_t dx = records.front().x.size(), dw = records.front().w.size();
    RowMatrix xw(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(dx + dw));
    std::vector<int> r;
    std::size_t complete = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ShadowRecord& rec = records[i];
        if (rec.x.size() != dx || rec.w.size() != dw) raise(ErrorCode::shape, "ragged shadow records");
        for (std::size_t j = 0; j < dx; ++j) xw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rec.x[j];
        for (std::size_t j = 0; j < dw; ++j)
            xw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dx + j)) = rec.w[j];
        r.push_back(rec.r());
        complete += static_cast<std::size_t>(rec.r());
    }
    if (complete == 0) raise(ErrorCode::fit, "extended propensity needs complete cases");
    PropensityModel pi = fit_propensity(xw, r, spec.propensity);

    RowMatrix inst(static_cast<Eigen::Index>(complete), xw.cols());
    RowMatrix endo(static_cast<Eigen::Index>(complete), static_cast<Eigen::Index>(dx + 1));
    Vector target(static_cast<Eigen::Index>(complete));
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].y) continue;
        inst.row(k) = xw.row(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < dx; ++j) endo(k, static_cast<Eigen::Index>(j)) = records[i].x[j];
        endo(k, static_cast<Eigen::Index>(dx)) = *records[i].y;
        target(k) = 1.0 / pi.predict(row(xw, static_cast<Eigen::Index>(i)));
        ++k;
    }
    int M = spec.M > 0 ? spec.M : 2 * spec.J;
    Sieve si(spec.instrument_basis, inst, M);
    Sieve se(spec.endogenous_basis, endo, spec.J);
    BridgeFunction u{se, fit_bridge_npiv(si.matrix(inst), se.matrix(endo), target, spec.lambda_grid, spec.seed)};
    return [u](Point xy) { return std::clamp(1.0 / std::max(u(xy), 1.0), 0.01, 1.0); };
}

}  // namespace fwreg
