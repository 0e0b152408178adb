#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace stiga {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

} // namespace stiga
