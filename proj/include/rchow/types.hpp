#pragma once

#include <Eigen/Dense>

namespace rchow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Sample points are stored one per row so a row is a contiguous R^n vector.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorRef = Eigen::Ref<const Vector>;

}  // namespace rchow
