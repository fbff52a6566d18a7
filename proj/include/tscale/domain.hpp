#pragma once

#include <string>

#include "tscale/types.hpp"

namespace tscale {

/// Open domain Omega in R^n: the whole space, an open box (infinite bounds
/// allowed) or an open ball.
class DomainOmega {
public:
    enum class Kind { whole_space, open_box, open_ball };

    static DomainOmega whole_space(Eigen::Index n);
    static DomainOmega open_box(Vector lo, Vector hi);
    static DomainOmega open_ball(Vector center, double radius);

    Kind kind() const { return kind_; }
    Eigen::Index dim() const { return dim_; }
    const Vector& lo() const { return a_; }
    const Vector& hi() const { return b_; }
    const Vector& center() const { return a_; }
    double radius() const { return radius_; }

    /// x in Omega. NaN components are never in Omega; on the whole space an
    /// infinite component is accepted (it is an overflow, not an exit).
    bool contains(const Vector& x) const;

    /// Euclidean distance to the complement; > 0 iff contains(x), +inf on the
    /// whole space.
    double dist_to_complement(const Vector& x) const;

    std::string describe() const;

private:
    DomainOmega(Kind k, Eigen::Index n) : kind_(k), dim_(n) {}

    Kind kind_;
    Eigen::Index dim_;
    Vector a_, b_;
    double radius_ = 0.0;
};

/// Closed axis-aligned box used as a sampling region by the hypothesis
/// checks.
struct Box {
    Vector lo;
    Vector hi;

    Eigen::Index dim() const { return lo.size(); }
};

}  // namespace tscale
