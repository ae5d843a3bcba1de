#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "fwreg/error.hpp"
#include "fwreg/linalg.hpp"
#include "fwreg/nuisance.hpp"

namespace fwreg {

namespace {

constexpr int kSegments = 20;
constexpr int kDegree = 3;
constexpr int kGcvGrid = 80;
constexpr double kGcvInflation = 1.4;

// K pins the constant of each spline block to the intercept; fitted values do not depend on it.
double edf_at(const Matrix& BtB, const Matrix& P, const Matrix& K, double lambda) {
    Matrix H = BtB + lambda * P + K;
    return Eigen::LDLT<Matrix>(H).solve(BtB).trace();
}

}  // namespace

void SmoothingSpline::features(Point x, double* out) const {
    out[0] = 1.0;
    int col = 1;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        const Block& b = blocks_[j];
        double v = std::clamp(x[j], b.lo, b.hi);
        if (b.linear) {
            out[col++] = v;
            continue;
        }
        std::vector<double> bs = bspline_values(b.knots, kDegree, v);
        for (double e : bs) out[col++] = e;
    }
}

SmoothingSpline SmoothingSpline::fit(const RowMatrix& X, const Vector& y, double df) {
    if (X.rows() != y.size()) raise(ErrorCode::shape, "smoothing spline inputs differ in length");
    if (X.rows() < 4) raise(ErrorCode::fit, "smoothing spline needs at least 4 observations");
    if (!(df > 1.0) && df != 0.0) raise(ErrorCode::config, "smoothing spline df must exceed 1 (or be 0 for GCV)");
    SmoothingSpline s;
    s.cols_ = 1;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        Block b;
        std::set<double> distinct;
        for (Eigen::Index i = 0; i < X.rows(); ++i) distinct.insert(X(i, j));
        b.lo = *distinct.begin();
        b.hi = *distinct.rbegin();
        int nd = static_cast<int>(distinct.size());
        if (nd < 4 || !(b.lo < b.hi)) {
            b.linear = true;
            b.width = 1;
        } else {
            int seg = std::clamp(nd / 4, 1, kSegments);
            for (int k = 0; k < kDegree; ++k) b.knots.push_back(b.lo);
            for (int k = 0; k <= seg; ++k) b.knots.push_back(b.lo + (b.hi - b.lo) * k / seg);
            for (int k = 0; k < kDegree; ++k) b.knots.push_back(b.hi);
            b.width = seg + kDegree;
        }
        s.cols_ += b.width;
        s.blocks_.push_back(std::move(b));
    }

    RowMatrix B(X.rows(), s.cols_);
    for (Eigen::Index i = 0; i < X.rows(); ++i) s.features(row(X, i), B.data() + i * s.cols_);
    Matrix P = Matrix::Zero(s.cols_, s.cols_);
    int col = 1;
    for (const Block& b : s.blocks_) {
        if (!b.linear && b.width >= 3) {
            Matrix D = Matrix::Zero(b.width - 2, b.width);
            for (int r = 0; r < b.width - 2; ++r) {
                D(r, r) = 1.0;
                D(r, r + 1) = -2.0;
                D(r, r + 2) = 1.0;
            }
            P.block(col, col, b.width, b.width) = D.transpose() * D;
        }
        col += b.width;
    }
    Matrix BtB = B.transpose() * B;
    Vector Bty = B.transpose() * y;
    Matrix K = Matrix::Zero(s.cols_, s.cols_);
    double kappa = BtB.trace() / s.cols_;
    col = 1;
    for (const Block& b : s.blocks_) {
        if (!b.linear) K.block(col, col, b.width, b.width).array() += kappa;
        col += b.width;
    }

    double scale = BtB.trace() / std::max(P.trace(), 1e-300);
    double lo = std::log(scale * 1e-10), hi = std::log(scale * 1e10);
    if (df == 0.0) {
        // Generalized cross-validation over a log grid, df inflated by kGcvInflation.
        const auto n = static_cast<double>(X.rows());
        double best = std::numeric_limits<double>::infinity();
        double yy = y.squaredNorm();
        for (int k = 0; k <= kGcvGrid; ++k) {
            double lam = std::exp(lo + (hi - lo) * k / kGcvGrid);
            Eigen::LDLT<Matrix> H(BtB + lam * P + K);
            Vector c = H.solve(Bty);
            double rss = std::max(yy - 2.0 * c.dot(Bty) + c.dot(BtB * c), 0.0);
            double edf = H.solve(BtB).trace();
            double denom = 1.0 - kGcvInflation * edf / n;
            if (!(denom > 0.0)) continue;
            double gcv = rss / n / (denom * denom);
            if (gcv < best) {
                best = gcv;
                s.lambda_ = lam;
            }
        }
        if (!std::isfinite(best)) s.lambda_ = std::exp(hi);
    } else {
        double df_max = edf_at(BtB, P, K, std::exp(lo));
        double df_min = edf_at(BtB, P, K, std::exp(hi));
        double target = std::clamp(df, df_min, df_max);
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            if (edf_at(BtB, P, K, std::exp(mid)) > target)
                lo = mid;
            else
                hi = mid;
        }
        s.lambda_ = std::exp(0.5 * (lo + hi));
    }
    s.edf_ = edf_at(BtB, P, K, s.lambda_);
    s.coef_ = Eigen::LDLT<Matrix>(BtB + s.lambda_ * P + K).solve(Bty);
    return s;
}

double SmoothingSpline::predict(Point x) const {
    if (x.size() != blocks_.size()) raise(ErrorCode::shape, "smoothing spline point dimension mismatch");
    Vector f(cols_);
    features(x, f.data());
    return f.dot(coef_);
}

}  // namespace fwreg
