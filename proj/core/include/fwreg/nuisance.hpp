#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fwreg/basis.hpp"
#include "fwreg/fw.hpp"
#include "fwreg/records.hpp"
#include "fwreg/types.hpp"

namespace fwreg {

enum class RegressionMethod { fw_series, ls_series, knn, smoothing_spline };

RegressionMethod parse_regression_method(const std::string& name);
std::string regression_method_name(RegressionMethod m);

struct RegressionSpec {
    RegressionMethod method = RegressionMethod::fw_series;
    BasisSpec basis;            // dim is taken from the data
    std::vector<int> J_grid;    // series: empty means the default grid
    int cv_repeats = 5;
    double split_fraction = 0.5;
    int k = 10;                 // knn
    double df = 5.0;            // smoothing spline; 0 selects the penalty by GCV
    std::uint64_t seed = 0;
};

class Regressor {
public:
    struct Impl;

    Regressor() = default;
    explicit Regressor(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    double predict(Point x) const;
    Evaluator evaluator() const;
    RegressionMethod method() const;
    // Series methods: CV-selected J per repeat.
    std::vector<int> selected_J() const;

private:
    std::shared_ptr<const Impl> impl_;
};

Regressor fit_regression(const RowMatrix& X, const Vector& y, const RegressionSpec& spec);

// Penalized cubic B-spline smoother, additive across coordinates, with the
// penalty chosen so the effective degrees of freedom equal df, or by GCV when df is 0.
class SmoothingSpline {
public:
    static SmoothingSpline fit(const RowMatrix& X, const Vector& y, double df);
    double predict(Point x) const;
    double lambda() const { return lambda_; }
    double effective_df() const { return edf_; }

private:
    struct Block {
        bool linear = false;
        double lo = 0.0, hi = 1.0;
        std::vector<double> knots;  // clamped knot vector
        int width = 0;              // number of columns
    };
    void features(Point x, double* out) const;
    std::vector<Block> blocks_;
    int cols_ = 0;
    Vector coef_;
    double lambda_ = 0.0;
    double edf_ = 0.0;
};

struct PropensitySpec {
    BasisSpec basis;    // dim is taken from the data
    int J = 0;          // 0: intercept plus one linear term per coordinate
    int max_iter = 50;
    double tol = 1e-8;
    double clip = 0.01;
};

class PropensityModel {
public:
    double predict(Point x) const;
    double linear_predictor(Point x) const;
    Evaluator evaluator() const;
    bool converged() const { return converged_; }
    int iterations() const { return iterations_; }
    const Vector& coefficients() const { return coef_; }

private:
    friend PropensityModel fit_propensity(const RowMatrix&, const std::vector<int>&, const PropensitySpec&);
    BasisSequence basis_;
    int J_ = 1;
    Vector coef_;
    double clip_ = 0.01;
    bool converged_ = false;
    int iterations_ = 0;
};

PropensityModel fit_propensity(const RowMatrix& X, const std::vector<int>& labels, const PropensitySpec& spec);

double expit(double v);
double logit(double p);

// pi_hat = expit(logit(pi) + eps), eps = n^-alpha (1 + z), z ~ N(0,1) drawn once from seed.
Evaluator corrupt_propensity(Evaluator pi_true, double alpha, int n, std::uint64_t seed, double clip = 0.01);
Evaluator corrupt_propensity_with(Evaluator pi_true, double alpha, int n, double z, double clip = 0.01);

struct BridgeSolution {
    Vector b;
    int M = 0;
    int J = 0;
    double lambda = 0.0;
    double objective = 0.0;       // |P(t - Psi b)|^2 + lambda |b|^2
    double residual_norm = 0.0;   // |P(t - Psi b)|
    std::vector<double> lambda_candidates;
    std::vector<double> cv_loss;
};

// Multiples of the largest eigenvalue of the projected Gram.
std::vector<double> default_lambda_grid();

BridgeSolution fit_bridge_npiv(const Matrix& instruments, const Matrix& endogenous, const Vector& target,
                               const std::vector<double>& lambda_grid = default_lambda_grid(),
                               std::uint64_t seed = 0);

// Objective of b under the instrument projection, for external checks.
double bridge_objective(const Matrix& instruments, const Matrix& endogenous, const Vector& target, const Vector& b,
                        double lambda);

// Basis expansion over a block of variables, sized at fit time.
class Sieve {
public:
    Sieve() = default;
    Sieve(const BasisSpec& spec, const RowMatrix& training, int J);
    int size() const { return J_; }
    Vector operator()(Point x) const { return basis_.evaluate(J_, x); }
    Matrix matrix(const RowMatrix& xs) const { return basis_.evaluate_matrix(J_, xs); }

private:
    BasisSequence basis_;
    int J_ = 1;
};

struct BridgeFunction {
    Sieve sieve;
    BridgeSolution solution;
    double operator()(Point x) const { return sieve(x).dot(solution.b); }
};

struct ExtendedPropensitySpec {
    BasisSpec instrument_basis;   // over (x, w)
    BasisSpec endogenous_basis;   // over (x, y)
    int J = 3;
    int M = 0;                    // 0: 2J
    std::vector<double> lambda_grid = default_lambda_grid();
    PropensitySpec propensity;    // over (x, w)
    std::uint64_t seed = 0;
};

Evaluator fit_extended_propensity(const std::vector<ShadowRecord>& records, const ExtendedPropensitySpec& spec);

}  // namespace fwreg
