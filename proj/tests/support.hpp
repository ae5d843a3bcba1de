#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fwreg/rng.hpp"
#include "fwreg/types.hpp"

namespace fwreg::testing {

inline RowMatrix uniform_points(int n, int d, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    RowMatrix m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = u(rng);
    return m;
}

inline Vector normal_vector(int n, Rng& rng, double sd = 1.0) {
    std::normal_distribution<double> g(0.0, sd);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

// Moore-Penrose pseudo-inverse through a complete orthogonal decomposition.
inline Matrix pinv(const Matrix& a) { return a.completeOrthogonalDecomposition().pseudoInverse(); }

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
}

inline double std_error(const std::vector<double>& v) {
    double m = mean(v), s = 0.0;
    for (double e : v) s += (e - m) * (e - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace fwreg::testing
