#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tscale {

/// Raised when a query names a value that is not a point of the time scale,
/// or when a time scale cannot be constructed from the given segments.
class TimeScaleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A closed interval [lo, hi] with lo < hi, or an isolated point (lo == hi).
struct Segment {
    double lo = 0.0;
    double hi = 0.0;

    static Segment interval(double lo, double hi);
    static Segment point(double t) { return Segment{t, t}; }

    bool is_point() const { return lo == hi; }
    bool operator==(const Segment&) const = default;
};

enum class LeftClass { dense, scattered, is_min };
enum class RightClass { dense, scattered, is_max };

struct PointClass {
    LeftClass left;
    RightClass right;
    bool operator==(const PointClass&) const = default;
};

const char* to_string(LeftClass c);
const char* to_string(RightClass c);

/// One piece of the canonical walk of [a,b)_T.
///   dense:     [lo, hi) lies inside one interval segment
///   scattered: lo is right-scattered and hi = sigma(lo)
struct Atom {
    enum class Kind { dense, scattered };
    Kind kind;
    double lo;
    double hi;

    bool is_dense() const { return kind == Kind::dense; }
    double length() const { return hi - lo; }
    bool operator==(const Atom&) const = default;

    static Atom dense_run(double lo, double hi) { return {Kind::dense, lo, hi}; }
    static Atom scattered_step(double t, double next) { return {Kind::scattered, t, next}; }
};

/// A bounded time scale: a finite, ordered union of closed intervals and
/// isolated points. Immutable once built.
///
/// Membership is exact: a value belongs to the scale iff it lies within the
/// stored endpoints of some segment, with no tolerance.
class TimeScale {
public:
    /// Normalizes the input (sorts, merges overlapping or touching segments,
    /// drops points covered by intervals). Throws TimeScaleError on
    /// non-finite input, an inverted interval, or fewer than two points.
    explicit TimeScale(std::vector<Segment> segments);

    const std::vector<Segment>& segments() const { return segments_; }
    /// Human-readable notes about what the constructor normalized. Empty when
    /// the input was already canonical.
    const std::vector<std::string>& normalization_notes() const { return notes_; }

    double min() const { return segments_.front().lo; }
    double max() const { return segments_.back().hi; }

    bool contains(double t) const;
    bool is_discrete() const;
    bool is_dense_interval() const { return segments_.size() == 1; }

    double sigma(double t) const;
    double rho(double t) const;
    double graininess(double t) const;
    PointClass classify(double t) const;

    bool right_scattered(double t) const { return sigma(t) > t; }
    bool left_scattered(double t) const { return rho(t) < t; }

    /// Right-scattered points in increasing order.
    std::vector<double> right_scattered_points() const;

    /// Ordered tiling of [a,b)_T by dense runs and scattered steps.
    std::vector<Atom> decompose(double a, double b) const;

    /// All points of a purely discrete scale, increasing. Throws otherwise.
    std::vector<double> discrete_points() const;

    std::string describe() const;

private:
    // index of the segment holding t, throws if none
    std::size_t locate(double t) const;

    std::vector<Segment> segments_;
    std::vector<std::string> notes_;
};

/// Finite truncation {lambda^(n-1), ..., lambda, 1} (plus 0 if requested) of
/// the quantum scale.
TimeScale make_quantum_scale(double lambda, int n_points, bool include_zero);

}  // namespace tscale
