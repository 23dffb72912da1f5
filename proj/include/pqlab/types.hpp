#pragma once

#include <Eigen/Core>

namespace pqlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Index = Eigen::Index;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

}  // namespace pqlab
