#pragma once

#include <Eigen/Core>

namespace madm {

// A point in R^d.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace madm
