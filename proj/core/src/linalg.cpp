#include "fwreg/linalg.hpp"

#include <algorithm>

#include "fwreg/error.hpp"

namespace fwreg {

SymmetricSpectrum::SymmetricSpectrum(const Matrix& a) {
    if (a.rows() != a.cols()) raise(ErrorCode::shape, "symmetric solve needs a square matrix");
    if (a.rows() == 0) return;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
        raise(ErrorCode::numerical_consistency, "eigendecomposition failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
    largest_ = values_.maxCoeff();
    threshold_ = 1e-10 * std::max(largest_, 1e-300);
    for (Eigen::Index k = 0; k < values_.size(); ++k)
        if (values_(k) > threshold_) ++rank_;
}

Vector SymmetricSpectrum::solve(const Vector& b) const {
    if (b.size() != values_.size()) raise(ErrorCode::shape, "right-hand side length mismatch");
    Vector c = vectors_.transpose() * b;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = in_range(k) ? c(k) / values_(k) : 0.0;
    return vectors_ * c;
}

Matrix SymmetricSpectrum::solve(const Matrix& b) const {
    if (b.rows() != values_.size()) raise(ErrorCode::shape, "right-hand side row mismatch");
    Matrix c = vectors_.transpose() * b;
    for (Eigen::Index k = 0; k < c.rows(); ++k) {
        if (in_range(k))
            c.row(k) /= values_(k);
        else
            c.row(k).setZero();
    }
    return vectors_ * c;
}

Vector sym_pseudo_solve(const Matrix& a, const Vector& b) { return SymmetricSpectrum(a).solve(b); }

}  // namespace fwreg
