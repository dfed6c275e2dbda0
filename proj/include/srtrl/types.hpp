#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace srtrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Row-major so that a hidden unit's sensitivities are one contiguous row.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;
using Step = std::int64_t;

}  // namespace srtrl
