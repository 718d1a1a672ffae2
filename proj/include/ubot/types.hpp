#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace ubot {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// One sample per row.
using MatX2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoPathFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ubot
