#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fwreg/basis.hpp"
#include "fwreg/linalg.hpp"
#include "fwreg/types.hpp"

namespace fwreg {

class FWModel {
public:
    FWModel() = default;

    static FWModel fit(const Matrix& design, const Vector& responses);
    static FWModel from_moments(Matrix gram, Vector moment, int n, double response_second_moment);

    int J() const { return static_cast<int>(moment_.size()); }
    int n() const { return n_; }
    const Matrix& gram() const { return gram_; }
    const Vector& moment() const { return moment_; }
    double response_second_moment() const { return second_moment_; }

    // Computed on first use, shared between copies.
    const SymmetricSpectrum& spectrum() const;

    struct Projection {
        double ell = 0.0;        // phi' G^+ phi over range(G)
        double ls = 0.0;         // phi' G^+ moment
        bool outside = false;    // phi has a component outside range(G)
    };
    Projection project(const Vector& phi) const;

private:
    struct Cache;
    Matrix gram_;
    Vector moment_;
    int n_ = 0;
    double second_moment_ = 0.0;
    std::shared_ptr<Cache> cache_;
};

double leverage(const FWModel& model, const Vector& phi);
double predict(const FWModel& model, const Vector& phi);
double predict_ls(const FWModel& model, const Vector& phi);

struct PointwiseVariance {
    double variance = 0.0;
    double half_width = 0.0;
};
PointwiseVariance pointwise_variance(const FWModel& model, const Vector& phi, double sigma2_pseudo);

struct RiskBoundInputs {
    double sigma2 = 1.0;
    double kappa = 1.0;
    double gamma_J = 0.0;
    int J = 1;
    int n = 1;
};
double risk_bound(const RiskBoundInputs& in);
int optimal_J(double sigma2, int n, const std::function<double(int)>& gamma, int cap = 512);

enum class Method { fw, ls };

class SeriesPredictor {
public:
    SeriesPredictor() = default;
    SeriesPredictor(BasisSequence basis, int J, FWModel model, Method method)
        : basis_(std::move(basis)), J_(J), model_(std::move(model)), method_(method) {}

    double predict(Point x) const;
    double leverage(Point x) const;
    double ell(Point x) const;

    const BasisSequence& basis() const { return basis_; }
    int J() const { return J_; }
    const FWModel& model() const { return model_; }
    Method method() const { return method_; }

private:
    BasisSequence basis_;
    int J_ = 1;
    FWModel model_;
    Method method_ = Method::fw;
};

class AveragedPredictor {
public:
    AveragedPredictor() = default;
    explicit AveragedPredictor(std::vector<SeriesPredictor> members) : members_(std::move(members)) {}

    double predict(Point x) const;
    const std::vector<SeriesPredictor>& members() const { return members_; }
    void add(SeriesPredictor p) { members_.push_back(std::move(p)); }

private:
    std::vector<SeriesPredictor> members_;
};

}  // namespace fwreg
