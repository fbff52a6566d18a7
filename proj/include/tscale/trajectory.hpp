#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tscale/timescale.hpp"
#include "tscale/types.hpp"

namespace tscale {

/// Continuous extension of one accepted Runge-Kutta step, valid for t between
/// t_from and t_from + h (h may be negative for backward integration).
struct DenseSegment {
    double t_from = 0.0;
    double h = 0.0;
    std::array<Vector, 5> coeff;

    double lo() const { return h > 0 ? t_from : t_from + h; }
    double hi() const { return h > 0 ? t_from + h : t_from; }
    double t_to() const { return t_from + h; }

    Vector value(double t) const;
    Vector derivative(double t) const;
};

struct Node {
    double t;
    Vector q;
};

enum class EndKind {
    extremity,  // reached min T / max T (or the requested stop point)
    escape,     // open endpoint: the state left the escape compact
    failure,    // closed by an existence failure (stability or regressivity)
};

const char* to_string(EndKind k);

struct EscapeEvidence {
    double t = 0.0;
    Vector q;
    double norm = 0.0;
    double boundary_distance = 0.0;
    std::string reason;
};

enum class FailureKind { stability_violation, regressivity_failure, evaluation_fault };

const char* to_string(FailureKind k);

struct Failure {
    Direction direction = Direction::forward;
    FailureKind kind = FailureKind::evaluation_fault;
    double t = 0.0;   // right-scattered point where the step could not be taken
    Vector x;         // state the failing step started from
    std::optional<Vector> image;
    std::string detail;
};

/// One side of the computed solution interval.
struct IntervalEnd {
    EndKind kind = EndKind::extremity;
    /// Extremity: last point reached. Escape: estimate of the open endpoint.
    /// Failure: last point where the solution exists.
    double t = 0.0;
    /// Bisection bracket around an escape endpoint (equal to t otherwise).
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    std::optional<PointClass> terminal_class;
    std::optional<EscapeEvidence> evidence;
};

enum class IntervalKind { global, forward_open, backward_open, both_open, existence_failure };

const char* to_string(IntervalKind k);

struct MaximalInterval {
    IntervalEnd lower;
    IntervalEnd upper;
    /// True when each side reached an extremity of the whole time scale.
    bool covers_scale = true;

    IntervalKind kind() const;
};

/// The computed solution (q, I_T): nodes at every scattered endpoint and every
/// accepted integrator step, plus dense interpolants between nodes inside
/// dense runs.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::size_t dim, double t0, Vector q0);

    std::size_t dim() const { return dim_; }
    double t0() const { return t0_; }
    const Vector& q0() const { return q0_; }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<DenseSegment>& dense_segments() const { return dense_; }

    double t_begin() const { return nodes_.front().t; }
    double t_end() const { return nodes_.back().t; }

    /// Value at a node or inside a dense segment. Throws std::out_of_range
    /// when t is outside the covered range or falls in a scattered gap.
    Vector at(double t) const;

    /// q^Delta(t) for t in [t_begin, t_end): exact quotient at right-scattered
    /// points, interpolant derivative at right-dense points.
    Vector delta_derivative(const TimeScale& ts, double t) const;

    const Node* find_node(double t) const;
    /// Dense segment whose half-open range [lo, hi) contains t, or nullptr.
    const DenseSegment* find_dense(double t) const;

    /// Breakpoints of the piecewise-polynomial interpolant.
    std::vector<double> dense_breakpoints() const;

    MaximalInterval interval;
    std::vector<Failure> failures;
    std::vector<std::string> warnings;

    // Building. Nodes and segments may be appended in either time direction;
    // finalize() sorts and deduplicates them.
    void add_node(double t, Vector q);
    void add_dense(DenseSegment seg);
    void finalize();

    /// Merges a backward half and a forward half that share the node t0.
    static Trajectory merge(const Trajectory& backward, const Trajectory& forward);

private:
    std::size_t dim_ = 0;
    double t0_ = 0.0;
    Vector q0_;
    std::vector<Node> nodes_;
    std::vector<DenseSegment> dense_;
};

}  // namespace tscale
