#pragma once

#include <Eigen/Dense>

namespace asympode {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace asympode
