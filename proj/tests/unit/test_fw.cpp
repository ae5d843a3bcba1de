#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fwreg/error.hpp"
#include "fwreg/fw.hpp"
#include "support.hpp"

namespace fwreg {
namespace {

using testing::normal_vector;
using testing::pinv;

Matrix random_design(int n, int J, Rng& rng) {
    std::normal_distribution<double> g;
    Matrix D(n, J);
    for (int i = 0; i < n; ++i) {
        D(i, 0) = 1.0;
        for (int j = 1; j < J; ++j) D(i, j) = g(rng);
    }
    return D;
}

Vector unit(double v) { return Vector::Constant(1, v); }

TEST(FW, FitSingleObservation) {
    FWModel m = FWModel::fit(Matrix::Ones(1, 1), unit(1.0));
    EXPECT_EQ(m.gram()(0, 0), 1.0);
    EXPECT_EQ(m.moment()(0), 1.0);
    EXPECT_EQ(m.response_second_moment(), 1.0);
    EXPECT_EQ(m.n(), 1);
}

TEST(FW, FitEmptySample) {
    FWModel m = FWModel::fit(Matrix(0, 2), Vector(0));
    EXPECT_EQ(m.gram(), Matrix::Zero(2, 2));
    EXPECT_EQ(m.moment(), Vector::Zero(2));
    Vector phi(2);
    phi << 1.0, 0.3;
    EXPECT_EQ(leverage(m, phi), 1.0);
    EXPECT_EQ(predict(m, phi), 0.0);
}

TEST(FW, ShapeMismatch) {
    try {
        FWModel::fit(Matrix::Ones(3, 2), Vector::Ones(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::shape);
    }
}

TEST(FW, GramMatchesOuterProductSum) {
    Rng rng(11);
    Matrix D = random_design(50, 6, rng);
    Vector y = normal_vector(50, rng);
    FWModel m = FWModel::fit(D, y);
    Matrix G = Matrix::Zero(6, 6);
    Vector b = Vector::Zero(6);
    double s2 = 0.0;
    for (int i = 0; i < 50; ++i) {
        Vector r = D.row(i).transpose();
        G += r * r.transpose();
        b += r * y(i);
        s2 += y(i) * y(i);
    }
    EXPECT_LE((m.gram() - G).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((m.moment() - b).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(m.response_second_moment(), s2 / 50, 1e-12);
}

TEST(FW, InterceptLeverage) {
    for (int n : {1, 2, 5, 40}) {
        FWModel m = FWModel::fit(Matrix::Ones(n, 1), Vector::Ones(n));
        EXPECT_NEAR(leverage(m, unit(1.0)), 1.0 / (n + 1), 1e-15);
    }
}

TEST(FW, LeverageWithinUnitInterval) {
    Rng rng(12);
    for (int t = 0; t < 200; ++t) {
        int J = 1 + static_cast<int>(rng() % 8);
        int n = static_cast<int>(rng() % 30);
        Matrix D = random_design(n, J, rng);
        FWModel m = FWModel::fit(D, normal_vector(n, rng));
        Vector phi = normal_vector(J, rng, 3.0);
        double h = leverage(m, phi);
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, 1.0);
    }
}

TEST(FW, InterceptSingleObservationPrediction) {
    FWModel m = FWModel::fit(Matrix::Ones(1, 1), unit(1.0));
    EXPECT_DOUBLE_EQ(predict(m, unit(1.0)), 0.25);
    EXPECT_DOUBLE_EQ(predict_ls(m, unit(1.0)), 1.0);
}

TEST(FW, ZeroResponsesPredictZero) {
    Rng rng(13);
    Matrix D = random_design(20, 4, rng);
    FWModel m = FWModel::fit(D, Vector::Zero(20));
    for (int t = 0; t < 20; ++t) EXPECT_EQ(predict(m, normal_vector(4, rng)), 0.0);
}

// n = 2, y = (1, 1), intercept only: h = 1/3 and the prediction is 4/9.
TEST(FW, TwoPointInterceptValue) {
    FWModel m = FWModel::fit(Matrix::Ones(2, 1), Vector::Ones(2));
    double h = leverage(m, unit(1.0));
    EXPECT_NEAR(h, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(predict(m, unit(1.0)), 4.0 / 9.0, 1e-15);
    // h(1-h) sqrt(mean y^2) = 2/9 does not bound this value
    EXPECT_GT(predict(m, unit(1.0)), h * (1 - h) * std::sqrt(m.response_second_moment()));
}

TEST(FW, BoundWithSampleNorm) {
    Rng rng(14);
    for (int t = 0; t < 500; ++t) {
        int J = 1 + static_cast<int>(rng() % 10);
        int n = 1 + static_cast<int>(rng() % 60);
        Matrix D = random_design(n, J, rng);
        Vector y = normal_vector(n, rng, 2.0);
        FWModel m = FWModel::fit(D, y);
        Vector phi = normal_vector(J, rng, 2.0);
        phi(0) = 1.0;
        double h = leverage(m, phi);
        double bound = (1 - h) * std::sqrt(h * (1 - h)) * y.norm();
        EXPECT_LE(std::abs(predict(m, phi)), bound + 1e-10);
    }
}

TEST(FW, ShermanMorrisonIdentity) {
    Rng rng(15);
    for (int t = 0; t < 200; ++t) {
        int J = 1 + static_cast<int>(rng() % 8);
        int n = J + 5 + static_cast<int>(rng() % 40);
        Matrix D = random_design(n, J, rng);
        FWModel m = FWModel::fit(D, normal_vector(n, rng));
        Vector phi = normal_vector(J, rng);
        Matrix Ginv = m.gram().inverse();
        double ell = phi.dot(Ginv * phi);
        double ls = phi.dot(Ginv * m.moment());
        double fw = predict(m, phi);
        EXPECT_NEAR(fw, ls / ((1 + ell) * (1 + ell)), 1e-8 * std::max(1.0, std::abs(fw)));
        EXPECT_NEAR(predict_ls(m, phi), ls, 1e-8 * std::max(1.0, std::abs(ls)));
    }
}

TEST(FW, AugmentedSampleEquivalence) {
    Rng rng(16);
    for (int t = 0; t < 200; ++t) {
        int J = 1 + static_cast<int>(rng() % 8);
        int n = static_cast<int>(rng() % 25);
        Matrix D = random_design(n, J, rng);
        Vector y = normal_vector(n, rng);
        FWModel m = FWModel::fit(D, y);
        Vector phi = normal_vector(J, rng);
        Matrix Da(n + 1, J);
        Da.topRows(n) = D;
        Da.row(n) = phi.transpose();
        Vector ya = Vector::Zero(n + 1);
        ya.head(n) = y;
        Matrix A = Da.transpose() * Da;
        double h = phi.dot(pinv(A) * phi);
        double ls_aug = phi.dot(pinv(A) * (Da.transpose() * ya));
        EXPECT_NEAR(predict(m, phi), (1 - h) * ls_aug, 1e-8 * std::max(1.0, std::abs(ls_aug)));
    }
}

TEST(FW, LeastSquaresInterpolatesSquareSystem) {
    Rng rng(17);
    Matrix D = random_design(5, 5, rng);
    Vector y = normal_vector(5, rng);
    FWModel m = FWModel::fit(D, y);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(predict_ls(m, D.row(i).transpose()), y(i), 1e-8);
}

TEST(FW, ShrinksFarFromData) {
    Rng rng(18);
    Matrix D = random_design(40, 2, rng);
    Vector y = normal_vector(40, rng) + D.col(1) * 3.0;
    FWModel m = FWModel::fit(D, y);
    double prev_h = 0.0, prev_abs = std::numeric_limits<double>::infinity();
    for (double x : {1e2, 1e4, 1e6, 1e8}) {
        Vector phi(2);
        phi << 1.0, x;
        double h = leverage(m, phi);
        EXPECT_GE(h, prev_h);
        prev_h = h;
        prev_abs = std::abs(predict(m, phi));
    }
    EXPECT_GT(prev_h, 1 - 1e-9);
    EXPECT_LT(prev_abs, 1e-3);
}

TEST(FW, PointwiseVariance) {
    FWModel m = FWModel::fit(Matrix::Ones(10, 1), Vector::Ones(10));
    EXPECT_EQ(pointwise_variance(m, unit(1.0), 0.0).variance, 0.0);
    auto v = pointwise_variance(m, unit(1.0), 2.5);
    EXPECT_NEAR(v.variance, 0.25, 1e-15);
    EXPECT_NEAR(v.half_width, 1.96 * 0.5, 1e-15);
}

TEST(FW, VarianceShrinksOnNestedSamples) {
    Rng rng(19);
    Matrix D = random_design(400, 4, rng);
    Vector y = normal_vector(400, rng);
    Vector phi = normal_vector(4, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {10, 20, 50, 100, 200, 400}) {
        FWModel m = FWModel::fit(D.topRows(n), y.head(n));
        double v = pointwise_variance(m, phi, 1.0).variance;
        EXPECT_LE(v, prev + 1e-12);
        prev = v;
    }
}

TEST(FW, RiskBoundArithmetic) {
    RiskBoundInputs in;
    in.sigma2 = 1.0;
    in.n = 100;
    in.J = 10;
    in.kappa = 1.0;
    in.gamma_J = 0.0;
    EXPECT_DOUBLE_EQ(risk_bound(in), 0.2);
}

TEST(FW, OptimalJByBruteForce) {
    auto gamma = [](int k) { return std::pow(static_cast<double>(k), -2.0); };
    int brute = 0;
    for (int k = 1; k <= 512 && !brute; ++k)
        if (gamma(k) * gamma(k) <= static_cast<double>(k) / 1e4) brute = k;
    ASSERT_EQ(brute, 7);
    EXPECT_EQ(optimal_J(1.0, 10000, gamma), 7);
    int prev = 0;
    for (int n = 10; n < 10'000'000; n *= 2) {
        int J = optimal_J(1.0, n, gamma);
        EXPECT_GE(J, prev);
        prev = J;
    }
}

TEST(FW, OptimalJCap) {
    try {
        optimal_J(1.0, 1'000'000, [](int) { return 1.0; });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::cap);
    }
}

}  // namespace
}  // namespace fwreg
