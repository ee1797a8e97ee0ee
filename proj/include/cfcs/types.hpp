#pragma once

#include <Eigen/Dense>

namespace cfcs {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMajorMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VectorXd = Vector<double>;
using RowMajorMatrixXd = RowMajorMatrix<double>;

using Index = Eigen::Index;

}  // namespace cfcs
