#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "fwreg/basis.hpp"
#include "fwreg/cv.hpp"
#include "fwreg/fw.hpp"
#include "fwreg/rng.hpp"

namespace {

using namespace fwreg;

RowMatrix points(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RowMatrix X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = u(rng);
    return X;
}

Vector responses(const RowMatrix& X, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 0.5);
    Vector y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) y(i) = std::sin(3.0 * X(i, 0)) + g(rng);
    return y;
}

BasisSequence bspline(const RowMatrix& X) {
    BasisSpec s;
    s.family = Family::bspline;
    return make_basis(s, X);
}

void BM_BasisEvaluateMatrix(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    RowMatrix X = points(n, 1);
    BasisSequence b = bspline(X);
    for (auto _ : state) benchmark::DoNotOptimize(b.evaluate_matrix(12, X));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BasisEvaluateMatrix)->Arg(1000)->Arg(10000);

void BM_Fit(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0)), J = static_cast<int>(state.range(1));
    RowMatrix X = points(n, 2);
    Vector y = responses(X, 3);
    Matrix D = bspline(X).evaluate_matrix(J, X);
    for (auto _ : state) benchmark::DoNotOptimize(FWModel::fit(D, y));
}
BENCHMARK(BM_Fit)->Args({1000, 8})->Args({10000, 8})->Args({10000, 20});

// First call pays for the eigendecomposition; later calls reuse it.
void BM_Predict(benchmark::State& state) {
    const int J = static_cast<int>(state.range(0));
    RowMatrix X = points(5000, 4);
    BasisSequence b = bspline(X);
    FWModel m = FWModel::fit(b.evaluate_matrix(J, X), responses(X, 5));
    double x = 0.3;
    Vector phi = b.evaluate(J, Point(&x, 1));
    m.spectrum();
    for (auto _ : state) benchmark::DoNotOptimize(predict(m, phi));
}
BENCHMARK(BM_Predict)->Arg(8)->Arg(20);

void BM_SelectJ(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    RowMatrix X = points(n, 6);
    Vector y = responses(X, 7);
    BasisSequence b = bspline(X);
    CVOptions opt;
    opt.seed = 8;
    for (auto _ : state) benchmark::DoNotOptimize(select_J_cv(X, y, b, opt));
}
BENCHMARK(BM_SelectJ)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
