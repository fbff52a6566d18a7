#include "tscale/timescale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tscale/format.hpp"

namespace tscale {

Segment Segment::interval(double lo, double hi) {
    if (!(lo < hi))
        throw TimeScaleError("interval requires lo < hi, got [" + format_double(lo) + ", " +
                             format_double(hi) + "]");
    return Segment{lo, hi};
}

const char* to_string(LeftClass c) {
    switch (c) {
        case LeftClass::dense: return "dense";
        case LeftClass::scattered: return "scattered";
        case LeftClass::is_min: return "min";
    }
    return "?";
}

const char* to_string(RightClass c) {
    switch (c) {
        case RightClass::dense: return "dense";
        case RightClass::scattered: return "scattered";
        case RightClass::is_max: return "max";
    }
    return "?";
}

TimeScale::TimeScale(std::vector<Segment> segments) {
    if (segments.empty()) throw TimeScaleError("time scale needs at least one segment");
    for (const auto& s : segments) {
        if (!std::isfinite(s.lo) || !std::isfinite(s.hi))
            throw TimeScaleError("time scale must be bounded (non-finite endpoint)");
        if (s.lo > s.hi)
            throw TimeScaleError("inverted interval [" + format_double(s.lo) + ", " +
                                 format_double(s.hi) + "]");
    }

    auto by_lo = [](const Segment& x, const Segment& y) {
        return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
    };
    if (!std::is_sorted(segments.begin(), segments.end(), by_lo)) {
        std::sort(segments.begin(), segments.end(), by_lo);
        notes_.emplace_back("sorted segments by left endpoint");
    }

    int merged = 0, absorbed_points = 0;
    segments_.reserve(segments.size());
    for (const auto& s : segments) {
        if (!segments_.empty() && s.lo <= segments_.back().hi) {
            Segment& cur = segments_.back();
            if (s.is_point() || (cur.is_point() && s.lo == cur.lo && s.hi == cur.hi))
                ++absorbed_points;
            else
                ++merged;
            cur.hi = std::max(cur.hi, s.hi);
            continue;
        }
        segments_.push_back(s);
    }
    if (merged > 0)
        notes_.push_back("merged " + std::to_string(merged) + " overlapping or touching segment(s)");
    if (absorbed_points > 0)
        notes_.push_back("dropped " + std::to_string(absorbed_points) +
                         " duplicate or covered point(s)");

    if (segments_.size() == 1 && segments_.front().is_point())
        throw TimeScaleError("time scale must contain at least two points");
}

std::size_t TimeScale::locate(double t) const {
    // first segment whose hi >= t
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const Segment& s, double v) { return s.hi < v; });
    if (it == segments_.end() || t < it->lo)
        throw TimeScaleError(format_double(t) + " is not a point of the time scale");
    return static_cast<std::size_t>(it - segments_.begin());
}

bool TimeScale::contains(double t) const {
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const Segment& s, double v) { return s.hi < v; });
    return it != segments_.end() && it->lo <= t;
}

bool TimeScale::is_discrete() const {
    return std::all_of(segments_.begin(), segments_.end(),
                       [](const Segment& s) { return s.is_point(); });
}

double TimeScale::sigma(double t) const {
    const std::size_t i = locate(t);
    if (t < segments_[i].hi) return t;
    if (i + 1 == segments_.size()) return t;
    return segments_[i + 1].lo;
}

double TimeScale::rho(double t) const {
    const std::size_t i = locate(t);
    if (t > segments_[i].lo) return t;
    if (i == 0) return t;
    return segments_[i - 1].hi;
}

double TimeScale::graininess(double t) const { return sigma(t) - t; }

PointClass TimeScale::classify(double t) const {
    const std::size_t i = locate(t);
    const Segment& s = segments_[i];
    PointClass pc{};
    if (t == min())
        pc.left = LeftClass::is_min;
    else
        pc.left = t > s.lo ? LeftClass::dense : LeftClass::scattered;
    if (t == max())
        pc.right = RightClass::is_max;
    else
        pc.right = t < s.hi ? RightClass::dense : RightClass::scattered;
    return pc;
}

std::vector<double> TimeScale::right_scattered_points() const {
    std::vector<double> out;
    out.reserve(segments_.size());
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) out.push_back(segments_[i].hi);
    return out;
}

std::vector<Atom> TimeScale::decompose(double a, double b) const {
    const std::size_t ia = locate(a);
    const std::size_t ib = locate(b);
    if (!(a < b))
        throw TimeScaleError("decompose requires a < b, got a=" + format_double(a) +
                             ", b=" + format_double(b));

    std::vector<Atom> atoms;
    for (std::size_t i = ia; i <= ib; ++i) {
        const Segment& s = segments_[i];
        const double lo = std::max(s.lo, a);
        const double hi = std::min(s.hi, b);
        if (lo < hi) atoms.push_back(Atom::dense_run(lo, hi));
        if (s.hi < b) atoms.push_back(Atom::scattered_step(s.hi, segments_[i + 1].lo));
    }
    return atoms;
}

std::vector<double> TimeScale::discrete_points() const {
    if (!is_discrete()) throw TimeScaleError("time scale has dense parts");
    std::vector<double> pts;
    pts.reserve(segments_.size());
    for (const auto& s : segments_) pts.push_back(s.lo);
    return pts;
}

std::string TimeScale::describe() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (i) os << " U ";
        const auto& s = segments_[i];
        if (s.is_point())
            os << '{' << format_double(s.lo) << '}';
        else
            os << '[' << format_double(s.lo) << ", " << format_double(s.hi) << ']';
    }
    return os.str();
}

TimeScale make_quantum_scale(double lambda, int n_points, bool include_zero) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw TimeScaleError("quantum scale requires 0 < lambda < 1");
    if (n_points < 2) throw TimeScaleError("quantum scale requires n_points >= 2");
    std::vector<Segment> segs;
    segs.reserve(static_cast<std::size_t>(n_points) + 1);
    if (include_zero) segs.push_back(Segment::point(0.0));
    for (int k = n_points - 1; k >= 0; --k) segs.push_back(Segment::point(std::pow(lambda, k)));
    return TimeScale(std::move(segs));
}

}  // namespace tscale
