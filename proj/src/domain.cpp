#include "tscale/domain.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tscale/format.hpp"

namespace tscale {

DomainOmega DomainOmega::whole_space(Eigen::Index n) {
    if (n < 1) throw std::invalid_argument("domain dimension must be >= 1");
    return DomainOmega(Kind::whole_space, n);
}

DomainOmega DomainOmega::open_box(Vector lo, Vector hi) {
    if (lo.size() < 1 || lo.size() != hi.size())
        throw std::invalid_argument("open box bounds must have equal, positive length");
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (std::isnan(lo[i]) || std::isnan(hi[i]) || !(lo[i] < hi[i]))
            throw std::invalid_argument("open box requires lo < hi in every component");
    }
    DomainOmega d(Kind::open_box, lo.size());
    d.a_ = std::move(lo);
    d.b_ = std::move(hi);
    return d;
}

DomainOmega DomainOmega::open_ball(Vector center, double radius) {
    if (center.size() < 1) throw std::invalid_argument("open ball center must be non-empty");
    if (!center.allFinite()) throw std::invalid_argument("open ball center must be finite");
    if (!(radius > 0)) throw std::invalid_argument("open ball radius must be positive");
    DomainOmega d(Kind::open_ball, center.size());
    d.a_ = std::move(center);
    d.radius_ = radius;
    return d;
}

bool DomainOmega::contains(const Vector& x) const {
    if (x.size() != dim_) return false;
    if (x.hasNaN()) return false;
    switch (kind_) {
        case Kind::whole_space: return true;
        case Kind::open_box:
            for (Eigen::Index i = 0; i < dim_; ++i)
                if (!(x[i] > a_[i] && x[i] < b_[i])) return false;
            return true;
        case Kind::open_ball: return (x - a_).norm() < radius_;
    }
    return false;
}

double DomainOmega::dist_to_complement(const Vector& x) const {
    if (!contains(x)) return 0.0;
    switch (kind_) {
        case Kind::whole_space: return std::numeric_limits<double>::infinity();
        case Kind::open_box: {
            double d = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < dim_; ++i)
                d = std::min({d, x[i] - a_[i], b_[i] - x[i]});
            return d;
        }
        case Kind::open_ball: return radius_ - (x - a_).norm();
    }
    return 0.0;
}

std::string DomainOmega::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::whole_space: os << "R^" << dim_; break;
        case Kind::open_box:
            for (Eigen::Index i = 0; i < dim_; ++i)
                os << (i ? " x " : "") << "]" << format_double(a_[i]) << ", " << format_double(b_[i])
                   << "[";
            break;
        case Kind::open_ball: {
            os << "B(";
            for (Eigen::Index i = 0; i < dim_; ++i) os << (i ? ", " : "") << format_double(a_[i]);
            os << "; " << format_double(radius_) << ")";
            break;
        }
    }
    return os.str();
}

}  // namespace tscale
