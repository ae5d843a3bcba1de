#include "fwreg/fw.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "fwreg/error.hpp"

namespace fwreg {

struct FWModel::Cache {
    std::once_flag once;
    std::unique_ptr<SymmetricSpectrum> spectrum;
    Vector rotated_moment;  // V' moment
};

FWModel FWModel::fit(const Matrix& design, const Vector& responses) {
    if (design.rows() != responses.size())
        raise(ErrorCode::shape, "design has " + std::to_string(design.rows()) + " rows but " +
                                    std::to_string(responses.size()) + " responses");
    if (design.cols() < 1) raise(ErrorCode::shape, "design needs J >= 1 columns");
    FWModel m;
    Eigen::Index J = design.cols();
    m.gram_ = Matrix::Zero(J, J);
    m.gram_.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    m.gram_ = m.gram_.selfadjointView<Eigen::Lower>();
    m.moment_ = design.transpose() * responses;
    m.n_ = static_cast<int>(design.rows());
    m.second_moment_ = m.n_ > 0 ? responses.squaredNorm() / m.n_ : 0.0;
    m.cache_ = std::make_shared<Cache>();
    return m;
}

FWModel FWModel::from_moments(Matrix gram, Vector moment, int n, double response_second_moment) {
    if (gram.rows() != gram.cols() || gram.rows() != moment.size())
        raise(ErrorCode::shape, "gram and moment sizes disagree");
    if (n < 0 || response_second_moment < 0.0) raise(ErrorCode::shape, "n and second moment must be nonnegative");
    FWModel m;
    m.gram_ = std::move(gram);
    m.moment_ = std::move(moment);
    m.n_ = n;
    m.second_moment_ = response_second_moment;
    m.cache_ = std::make_shared<Cache>();
    return m;
}

const SymmetricSpectrum& FWModel::spectrum() const {
    if (!cache_) raise(ErrorCode::shape, "model not fitted");
    std::call_once(cache_->once, [this] {
        cache_->spectrum = std::make_unique<SymmetricSpectrum>(gram_);
        cache_->rotated_moment = cache_->spectrum->eigenvectors().transpose() * moment_;
    });
    return *cache_->spectrum;
}

FWModel::Projection FWModel::project(const Vector& phi) const {
    if (phi.size() != moment_.size())
        raise(ErrorCode::shape, "phi has length " + std::to_string(phi.size()) + ", model J is " +
                                    std::to_string(moment_.size()));
    const SymmetricSpectrum& s = spectrum();
    const Vector& mt = cache_->rotated_moment;
    Vector c = s.eigenvectors().transpose() * phi;
    Projection p;
    double null_sq = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        if (s.in_range(k)) {
            p.ell += c(k) * c(k) / s.eigenvalues()(k);
            p.ls += c(k) * mt(k) / s.eigenvalues()(k);
        } else {
            null_sq += c(k) * c(k);
        }
    }
    double scale = std::max(s.largest(), phi.squaredNorm());
    p.outside = n_ == 0 || null_sq / (1.0 + p.ell) > 1e-10 * scale;
    return p;
}

double leverage(const FWModel& model, const Vector& phi) {
    FWModel::Projection p = model.project(phi);
    if (p.outside) return 1.0;
    double h = p.ell / (1.0 + p.ell);
    if (h < -1e-10 || h > 1.0 + 1e-10)
        raise(ErrorCode::numerical_consistency, "leverage " + std::to_string(h) + " outside [0,1]");
    return std::clamp(h, 0.0, 1.0);
}

double predict(const FWModel& model, const Vector& phi) {
    FWModel::Projection p = model.project(phi);
    if (p.outside) return 0.0;
    double d = 1.0 + p.ell;
    return p.ls / (d * d);
}

double predict_ls(const FWModel& model, const Vector& phi) { return model.project(phi).ls; }

PointwiseVariance pointwise_variance(const FWModel& model, const Vector& phi, double sigma2_pseudo) {
    if (sigma2_pseudo < 0.0) raise(ErrorCode::shape, "pseudo-outcome variance must be nonnegative");
    PointwiseVariance v;
    v.variance = model.project(phi).ell * sigma2_pseudo;
    v.half_width = 1.96 * std::sqrt(v.variance);
    return v;
}

double risk_bound(const RiskBoundInputs& in) {
    if (in.sigma2 < 0.0 || in.kappa < 0.0 || in.gamma_J < 0.0 || in.J < 1 || in.n < 1)
        raise(ErrorCode::shape, "risk bound inputs must be nonnegative with J, n >= 1");
    return 2.0 * in.sigma2 * in.J / in.n + in.kappa * in.gamma_J * in.gamma_J;
}

int optimal_J(double sigma2, int n, const std::function<double(int)>& gamma, int cap) {
    if (n < 1) raise(ErrorCode::shape, "n must be >= 1");
    for (int k = 1; k <= cap; ++k) {
        double g = gamma(k);
        if (g * g <= sigma2 * k / n) return k;
    }
    raise(ErrorCode::cap, "no k <= " + std::to_string(cap) + " satisfies gamma_k^2 <= sigma^2 k / n");
}

double SeriesPredictor::predict(Point x) const {
    Vector phi = basis_.evaluate(J_, x);
    return method_ == Method::fw ? fwreg::predict(model_, phi) : predict_ls(model_, phi);
}

double SeriesPredictor::leverage(Point x) const { return fwreg::leverage(model_, basis_.evaluate(J_, x)); }

double SeriesPredictor::ell(Point x) const { return model_.project(basis_.evaluate(J_, x)).ell; }

double AveragedPredictor::predict(Point x) const {
    if (members_.empty()) raise(ErrorCode::shape, "empty averaged predictor");
    double s = 0.0;
    for (const SeriesPredictor& m : members_) s += m.predict(x);
    return s / static_cast<double>(members_.size());
}

}  // namespace fwreg
