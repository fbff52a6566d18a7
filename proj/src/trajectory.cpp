#include "tscale/trajectory.hpp"

#include <algorithm>
#include <stdexcept>

#include "tscale/format.hpp"

namespace tscale {

// Dormand-Prince continuous extension:
//   y(theta) = c0 + theta (c1 + (1-theta) (c2 + theta (c3 + (1-theta) c4)))
Vector DenseSegment::value(double t) const {
    const double th = (t - t_from) / h;
    const double th1 = 1.0 - th;
    return coeff[0] + th * (coeff[1] + th1 * (coeff[2] + th * (coeff[3] + th1 * coeff[4])));
}

Vector DenseSegment::derivative(double t) const {
    const double th = (t - t_from) / h;
    const double th1 = 1.0 - th;
    const Vector c = coeff[3] + th1 * coeff[4];
    const Vector b = coeff[2] + th * c;
    const Vector a = coeff[1] + th1 * b;
    const Vector dc = -coeff[4];
    const Vector db = c + th * dc;
    const Vector da = -b + th1 * db;
    return (a + th * da) / h;
}

const char* to_string(EndKind k) {
    switch (k) {
        case EndKind::extremity: return "extremity";
        case EndKind::escape: return "escape";
        case EndKind::failure: return "failure";
    }
    return "?";
}

const char* to_string(FailureKind k) {
    switch (k) {
        case FailureKind::stability_violation: return "StabilityViolation";
        case FailureKind::regressivity_failure: return "RegressivityFailure";
        case FailureKind::evaluation_fault: return "EvaluationFault";
    }
    return "?";
}

const char* to_string(IntervalKind k) {
    switch (k) {
        case IntervalKind::global: return "global";
        case IntervalKind::forward_open: return "forward_open";
        case IntervalKind::backward_open: return "backward_open";
        case IntervalKind::both_open: return "both_open";
        case IntervalKind::existence_failure: return "existence_failure";
    }
    return "?";
}

IntervalKind MaximalInterval::kind() const {
    if (lower.kind == EndKind::failure || upper.kind == EndKind::failure)
        return IntervalKind::existence_failure;
    const bool lo_open = lower.kind == EndKind::escape;
    const bool hi_open = upper.kind == EndKind::escape;
    if (lo_open && hi_open) return IntervalKind::both_open;
    if (hi_open) return IntervalKind::forward_open;
    if (lo_open) return IntervalKind::backward_open;
    return IntervalKind::global;
}

Trajectory::Trajectory(std::size_t dim, double t0, Vector q0)
    : dim_(dim), t0_(t0), q0_(std::move(q0)) {
    nodes_.push_back({t0_, q0_});
    interval.lower.t = interval.lower.bracket_lo = interval.lower.bracket_hi = t0_;
    interval.upper.t = interval.upper.bracket_lo = interval.upper.bracket_hi = t0_;
}

void Trajectory::add_node(double t, Vector q) { nodes_.push_back({t, std::move(q)}); }

void Trajectory::add_dense(DenseSegment seg) { dense_.push_back(std::move(seg)); }

void Trajectory::finalize() {
    std::stable_sort(nodes_.begin(), nodes_.end(),
                     [](const Node& a, const Node& b) { return a.t < b.t; });
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end(),
                             [](const Node& a, const Node& b) { return a.t == b.t; }),
                 nodes_.end());
    std::sort(dense_.begin(), dense_.end(),
              [](const DenseSegment& a, const DenseSegment& b) { return a.lo() < b.lo(); });
}

const Node* Trajectory::find_node(double t) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t,
                               [](const Node& n, double v) { return n.t < v; });
    if (it == nodes_.end() || it->t != t) return nullptr;
    return &*it;
}

const DenseSegment* Trajectory::find_dense(double t) const {
    // last segment with lo <= t
    auto it = std::upper_bound(dense_.begin(), dense_.end(), t,
                               [](double v, const DenseSegment& s) { return v < s.lo(); });
    if (it == dense_.begin()) return nullptr;
    --it;
    if (t >= it->lo() && t < it->hi()) return &*it;
    return nullptr;
}

Vector Trajectory::at(double t) const {
    if (const Node* n = find_node(t)) return n->q;
    if (const DenseSegment* s = find_dense(t)) return s->value(t);
    throw std::out_of_range("trajectory has no value at t=" + format_double(t));
}

Vector Trajectory::delta_derivative(const TimeScale& ts, double t) const {
    const double s = ts.sigma(t);
    if (s > t) {
        const Node* a = find_node(t);
        const Node* b = find_node(s);
        if (!a || !b)
            throw std::out_of_range("trajectory lacks the scattered step at t=" + format_double(t));
        return (b->q - a->q) / (s - t);
    }
    if (const DenseSegment* seg = find_dense(t)) return seg->derivative(t);
    throw std::out_of_range("trajectory lacks dense output at t=" + format_double(t));
}

std::vector<double> Trajectory::dense_breakpoints() const {
    std::vector<double> bp;
    bp.reserve(2 * dense_.size());
    for (const auto& s : dense_) {
        bp.push_back(s.lo());
        bp.push_back(s.hi());
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
}

Trajectory Trajectory::merge(const Trajectory& backward, const Trajectory& forward) {
    if (backward.t0_ != forward.t0_)
        throw std::invalid_argument("merge: halves do not share the initial time");
    Trajectory out(forward.dim_, forward.t0_, forward.q0_);
    out.nodes_.clear();
    out.nodes_.reserve(backward.nodes_.size() + forward.nodes_.size());
    out.nodes_.insert(out.nodes_.end(), backward.nodes_.begin(), backward.nodes_.end());
    out.nodes_.insert(out.nodes_.end(), forward.nodes_.begin(), forward.nodes_.end());
    out.dense_ = backward.dense_;
    out.dense_.insert(out.dense_.end(), forward.dense_.begin(), forward.dense_.end());
    out.interval.lower = backward.interval.lower;
    out.interval.upper = forward.interval.upper;
    out.interval.covers_scale = backward.interval.covers_scale && forward.interval.covers_scale;
    out.failures = backward.failures;
    out.failures.insert(out.failures.end(), forward.failures.begin(), forward.failures.end());
    out.warnings = backward.warnings;
    for (const auto& w : forward.warnings)
        if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end())
            out.warnings.push_back(w);
    out.finalize();
    return out;
}

}  // namespace tscale
