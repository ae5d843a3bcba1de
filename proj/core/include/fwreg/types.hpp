#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

namespace fwreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Row-major so that each observation is a contiguous span.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Point = std::span<const double>;
using Evaluator = std::function<double(Point)>;

inline Point row(const RowMatrix& m, Eigen::Index i) {
    return Point(m.data() + i * m.cols(), static_cast<std::size_t>(m.cols()));
}

}  // namespace fwreg
