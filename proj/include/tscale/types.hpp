#pragma once

#include <Eigen/Core>

namespace tscale {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Direction { forward, backward };

inline const char* to_string(Direction d) {
    return d == Direction::forward ? "forward" : "backward";
}

}  // namespace tscale
