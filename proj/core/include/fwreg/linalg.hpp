#pragma once

#include "fwreg/types.hpp"

namespace fwreg {

// Eigendecomposition of a symmetric matrix with the pseudo-inverse threshold
// 1e-10 * max(largest eigenvalue, 1e-300).
class SymmetricSpectrum {
public:
    explicit SymmetricSpectrum(const Matrix& a);

    const Vector& eigenvalues() const { return values_; }
    const Matrix& eigenvectors() const { return vectors_; }
    double largest() const { return largest_; }
    double threshold() const { return threshold_; }
    bool in_range(Eigen::Index k) const { return values_(k) > threshold_; }
    int rank() const { return rank_; }

    Vector solve(const Vector& b) const;
    Matrix solve(const Matrix& b) const;

private:
    Vector values_;
    Matrix vectors_;
    double largest_ = 0.0;
    double threshold_ = 0.0;
    int rank_ = 0;
};

// Minimum-norm solution of a x = b for symmetric a.
Vector sym_pseudo_solve(const Matrix& a, const Vector& b);

}  // namespace fwreg
