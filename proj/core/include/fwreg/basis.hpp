#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fwreg/types.hpp"

namespace fwreg {

enum class Family { polynomial, trigonometric, bspline, natural_spline, partition };
enum class MultivariateMode { additive, tensor };

struct Interval {
    double lower = -1.0;
    double upper = 1.0;
};

struct BasisSpec {
    Family family = Family::polynomial;
    int degree = 3;  // bspline
    int order = 0;   // partition
    std::vector<Interval> domain;  // empty: inferred from the training covariates
    int dim = 1;
    MultivariateMode mode = MultivariateMode::additive;
    int tensor_cap = 64;
    int interior_knots = 20;  // knot budget at the largest truncation
};

Family parse_family(const std::string& name);
std::string family_name(Family f);

namespace detail {
struct BasisImpl;
}

// Immutable after make_basis; cheap to copy (shared state).
class BasisSequence {
public:
    BasisSequence() = default;

    const BasisSpec& spec() const;
    int dim() const;
    int max_J() const;
    // Knots per coordinate at the largest truncation.
    std::vector<std::vector<double>> knots() const;
    const std::vector<Interval>& domain() const;

    Vector evaluate(int J, Point x) const;
    void evaluate_into(int J, Point x, double* out) const;
    Matrix evaluate_matrix(int J, const RowMatrix& xs) const;

private:
    friend BasisSequence make_basis(const BasisSpec&, const RowMatrix&);
    std::shared_ptr<const detail::BasisImpl> impl_;
};

BasisSequence make_basis(const BasisSpec& spec, const RowMatrix& training);

Vector evaluate(const BasisSequence& basis, int J, Point x);
Matrix evaluate_matrix(const BasisSequence& basis, int J, const RowMatrix& xs);

// All B-splines of the given degree on a clamped knot vector at t.
std::vector<double> bspline_values(const std::vector<double>& full_knots, int degree, double t);
// Sample quantile, linear interpolation between order statistics (R type 7).
double quantile_type7(const std::vector<double>& sorted, double p);

}  // namespace fwreg
