#pragma once

#include <cmath>

#include "tscale/types.hpp"

namespace tscale {

// Componentwise Neumaier summation.
class CompensatedSum {
public:
    explicit CompensatedSum(Eigen::Index dim = 0)
        : sum_(Vector::Zero(dim)), comp_(Vector::Zero(dim)) {}

    Eigen::Index dim() const { return sum_.size(); }

    void add(const Vector& v) {
        for (Eigen::Index i = 0; i < sum_.size(); ++i) {
            const double t = sum_[i] + v[i];
            if (std::abs(sum_[i]) >= std::abs(v[i]))
                comp_[i] += (sum_[i] - t) + v[i];
            else
                comp_[i] += (v[i] - t) + sum_[i];
            sum_[i] = t;
        }
    }

    Vector value() const { return sum_ + comp_; }

private:
    Vector sum_;
    Vector comp_;
};

}  // namespace tscale
