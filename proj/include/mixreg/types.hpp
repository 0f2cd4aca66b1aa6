#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace mixreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;  // per-sample component labels, 1 or 0

}  // namespace mixreg
