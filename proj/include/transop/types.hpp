#pragma once

#include <Eigen/Dense>

namespace transop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace transop
