#include "tscale/deltacalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "tscale/format.hpp"
#include "tscale/summation.hpp"

namespace tscale {

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss 7-point weights for the odd-indexed Kronrod abscissae (1, 3, 5, 7).
constexpr double kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    Vector value;
    double err;
};

struct PanelOrder {
    bool operator()(const Panel& a, const Panel& b) const { return a.err < b.err; }
};

Panel gauss_kronrod(const VectorFunction& g, double lo, double hi, long& evals) {
    const double c = 0.5 * (lo + hi);
    const double r = 0.5 * (hi - lo);
    Vector fc = g(c);
    Vector kron = kWgk[7] * fc;
    Vector gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = r * kXgk[j];
        Vector f1 = g(c - dx);
        Vector f2 = g(c + dx);
        Vector s = f1 + f2;
        kron += kWgk[j] * s;
        if (j % 2 == 1) gauss += kWg[j / 2] * s;
    }
    evals += 15;
    kron *= r;
    gauss *= r;
    const double err = (kron - gauss).lpNorm<Eigen::Infinity>();
    return Panel{lo, hi, std::move(kron), err};
}

double inf_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Adaptive integration over a list of initial panels; returns the summed value.
IntegralResult integrate_panels(const VectorFunction& g,
                                const std::vector<std::pair<double, double>>& pieces,
                                const QuadratureConfig& cfg, Eigen::Index dim) {
    IntegralResult res;
    res.value = Vector::Zero(dim);
    if (pieces.empty()) return res;

    std::priority_queue<Panel, std::vector<Panel>, PanelOrder> open;
    std::vector<Panel> frozen;
    double total_err = 0.0;
    Vector total = Vector::Zero(dim);
    for (const auto& [lo, hi] : pieces) {
        Panel p = gauss_kronrod(g, lo, hi, res.evaluations);
        total += p.value;
        total_err += p.err;
        open.push(std::move(p));
    }

    auto target = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * inf_norm(total)); };

    while (total_err > target() && !open.empty()) {
        if (res.subdivisions >= cfg.max_subdivisions) break;
        Panel worst = open.top();
        open.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            frozen.push_back(std::move(worst));
            continue;
        }
        Panel left = gauss_kronrod(g, worst.lo, mid, res.evaluations);
        Panel right = gauss_kronrod(g, mid, worst.hi, res.evaluations);
        ++res.subdivisions;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        open.push(std::move(left));
        open.push(std::move(right));
    }

    // Exact re-summation in increasing-t order.
    std::vector<Panel> all = std::move(frozen);
    while (!open.empty()) {
        all.push_back(open.top());
        open.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& a, const Panel& b) { return a.lo < b.lo; });
    CompensatedSum sum(dim);
    double err = 0.0;
    for (const auto& p : all) {
        sum.add(p.value);
        err += p.err;
    }
    res.value = sum.value();
    res.error_estimate = err;
    if (!(err <= std::max(cfg.abs_tol, cfg.rel_tol * inf_norm(res.value)))) {
        throw QuadratureError("adaptive quadrature did not converge (error estimate " +
                                  format_double(err) + " after " +
                                  std::to_string(res.subdivisions) + " subdivisions)",
                              res);
    }
    return res;
}

void check_endpoints(const TimeScale& ts, double a, double b) {
    if (!ts.contains(a)) throw TimeScaleError(format_double(a) + " is not a point of the time scale");
    if (!ts.contains(b)) throw TimeScaleError(format_double(b) + " is not a point of the time scale");
    if (a > b)
        throw std::invalid_argument("integration bounds must satisfy a <= b, got a=" +
                                    format_double(a) + ", b=" + format_double(b));
}

std::vector<std::pair<double, double>> split_run(double lo, double hi,
                                                 std::span<const double> breakpoints) {
    std::vector<std::pair<double, double>> out;
    double cur = lo;
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), lo);
    for (; it != breakpoints.end() && *it < hi; ++it) {
        out.emplace_back(cur, *it);
        cur = *it;
    }
    out.emplace_back(cur, hi);
    return out;
}

}  // namespace

void QuadratureConfig::validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0))
        throw std::invalid_argument("quadrature tolerances must be positive");
    if (max_subdivisions < 1) throw std::invalid_argument("max_subdivisions must be >= 1");
}

double delta_measure(const TimeScale& ts, double a, double b) {
    check_endpoints(ts, a, b);
    if (a == b) return 0.0;
    CompensatedSum dense(1), scattered(1);
    for (const Atom& atom : ts.decompose(a, b)) {
        Vector len(1);
        len[0] = atom.length();
        (atom.is_dense() ? dense : scattered).add(len);
    }
    const double pieces = dense.value()[0] + scattered.value()[0];
    const double direct = b - a;
    if (std::abs(pieces - direct) > 1e-12 * std::max(1.0, std::abs(direct)))
        throw std::logic_error("delta measure decomposition disagrees with b - a");
    return direct;
}

IntegralResult delta_integral(const TimeScale& ts, const VectorFunction& g, double a, double b,
                              const QuadratureConfig& cfg, std::span<const double> breakpoints) {
    cfg.validate();
    check_endpoints(ts, a, b);
    if (a == b) {
        IntegralResult r;
        r.value = g(a);
        r.value.setZero();
        r.evaluations = 1;
        return r;
    }

    std::vector<double> bp(breakpoints.begin(), breakpoints.end());
    std::sort(bp.begin(), bp.end());

    std::vector<std::pair<double, double>> pieces;
    CompensatedSum scattered(0);
    long scattered_evals = 0;
    for (const Atom& atom : ts.decompose(a, b)) {
        if (atom.is_dense()) {
            auto run = split_run(atom.lo, atom.hi, bp);
            pieces.insert(pieces.end(), run.begin(), run.end());
        } else {
            Vector v = atom.length() * g(atom.lo);
            ++scattered_evals;
            if (scattered.dim() == 0) scattered = CompensatedSum(v.size());
            scattered.add(v);
        }
    }

    Eigen::Index dim = scattered.dim();
    if (dim == 0) dim = g(pieces.front().first).size();

    IntegralResult dense_part;
    try {
        dense_part = integrate_panels(g, pieces, cfg, dim);
    } catch (const QuadratureError& e) {
        IntegralResult partial = e.partial();
        if (scattered.dim() == dim) partial.value += scattered.value();
        throw QuadratureError(e.what(), partial);
    }
    if (scattered.dim() == dim) {
        CompensatedSum total(dim);
        total.add(scattered.value());
        total.add(dense_part.value);
        dense_part.value = total.value();
    }
    dense_part.evaluations += scattered_evals;
    return dense_part;
}

ScalarIntegral delta_integral(const TimeScale& ts, const ScalarFunction& g, double a, double b,
                              const QuadratureConfig& cfg, std::span<const double> breakpoints) {
    VectorFunction vg = [&g](double t) {
        Vector v(1);
        v[0] = g(t);
        return v;
    };
    IntegralResult r = delta_integral(ts, vg, a, b, cfg, breakpoints);
    return {r.value[0], r.error_estimate};
}

ScalarIntegral dense_integral(const TimeScale& ts, const ScalarFunction& g, double a, double b,
                              const QuadratureConfig& cfg) {
    cfg.validate();
    check_endpoints(ts, a, b);
    if (a == b) return {};
    std::vector<std::pair<double, double>> pieces;
    for (const Atom& atom : ts.decompose(a, b))
        if (atom.is_dense()) pieces.emplace_back(atom.lo, atom.hi);
    VectorFunction vg = [&g](double t) {
        Vector v(1);
        v[0] = g(t);
        return v;
    };
    IntegralResult r = integrate_panels(vg, pieces, cfg, 1);
    return {r.value[0], r.error_estimate};
}

DerivativeResult delta_derivative(const TimeScale& ts, const VectorFunction& q, double t) {
    const PointClass pc = ts.classify(t);
    if (pc.right == RightClass::scattered) {
        const double s = ts.sigma(t);
        return {(q(s) - q(t)) / (s - t), 0.0, true};
    }
    if (pc.right == RightClass::is_max && pc.left != LeftClass::dense)
        throw DerivativeError("t = " + format_double(t) +
                              " is a left-scattered maximum; q^Delta is undefined there");

    // The segment holding t is an interval here (t is right-dense or a
    // left-dense maximum).
    const auto& segs = ts.segments();
    auto it = std::find_if(segs.begin(), segs.end(),
                           [t](const Segment& s) { return s.lo <= t && t <= s.hi; });
    const double room_fwd = it->hi - t;
    const double room_bwd = t - it->lo;
    const double h_max = std::min(1e-3, (it->hi - it->lo) / 8.0);
    double dir = 1.0, room = room_fwd;
    if (room_fwd < h_max && room_bwd > room_fwd) {
        dir = -1.0;
        room = room_bwd;
    }
    const double h0 = std::min(h_max, room);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h0 < floor)
        throw DerivativeError("difference step underflow at t = " + format_double(t) +
                              " (dense run too short on both sides)");

    // One-sided Richardson extrapolation (Neville tableau, error expansion in
    // all integer powers of h).
    constexpr int kTab = 10;
    constexpr double kCon = 2.0;
    const Vector q_t = q(t);
    auto quotient = [&](double h) {
        const double s = t + dir * h;
        return Vector((q(s) - q_t) / (s - t));
    };
    std::vector<std::vector<Vector>> a(kTab, std::vector<Vector>(kTab));
    double h = h0;
    a[0][0] = quotient(h);
    Vector best = a[0][0];
    double err = std::numeric_limits<double>::infinity();
    for (int i = 1; i < kTab; ++i) {
        h /= kCon;
        if (h < floor) break;
        a[i][0] = quotient(h);
        double fac = kCon;
        for (int j = 1; j <= i; ++j) {
            a[i][j] = (fac * a[i][j - 1] - a[i - 1][j - 1]) / (fac - 1.0);
            fac *= kCon;
            const double errt = std::max(inf_norm(a[i][j] - a[i][j - 1]),
                                         inf_norm(a[i][j] - a[i - 1][j - 1]));
            if (errt <= err) {
                err = errt;
                best = a[i][j];
            }
        }
        if (inf_norm(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err) break;
    }
    return {best, err, false};
}

DerivativeResult delta_derivative(const TimeScale& ts, const ScalarFunction& q, double t) {
    VectorFunction vq = [&q](double s) {
        Vector v(1);
        v[0] = q(s);
        return v;
    };
    return delta_derivative(ts, vq, t);
}

double fundamental_check(const TimeScale& ts, const Trajectory& q, double t0, double t,
                         const QuadratureConfig& cfg) {
    if (t0 == t) return 0.0;
    const double lo = std::min(t0, t), hi = std::max(t0, t);
    const std::vector<double> bp = q.dense_breakpoints();
    VectorFunction qd = [&](double tau) { return q.delta_derivative(ts, tau); };
    IntegralResult integral;
    try {
        integral = delta_integral(ts, qd, lo, hi, cfg, bp);
    } catch (const QuadratureError& e) {
        integral = e.partial();
    }
    const Vector diff = q.at(t) - q.at(t0);
    const Vector residual = t >= t0 ? Vector(diff - integral.value) : Vector(diff + integral.value);
    return residual.norm();
}

std::vector<double> fundamental_residuals(const TimeScale& ts, const Trajectory& q,
                                          const QuadratureConfig& cfg) {
    const auto& nodes = q.nodes();
    std::vector<double> out(nodes.size(), 0.0);
    auto it0 = std::find_if(nodes.begin(), nodes.end(),
                            [&](const Node& n) { return n.t == q.t0(); });
    if (it0 == nodes.end()) throw std::invalid_argument("trajectory has no node at t0");
    const std::size_t i0 = static_cast<std::size_t>(it0 - nodes.begin());
    const std::vector<double> bp = q.dense_breakpoints();
    VectorFunction qd = [&](double tau) { return q.delta_derivative(ts, tau); };

    auto piece = [&](double lo, double hi) {
        try {
            return delta_integral(ts, qd, lo, hi, cfg, bp).value;
        } catch (const QuadratureError& e) {
            return e.partial().value;
        }
    };

    const Eigen::Index n = static_cast<Eigen::Index>(q.dim());
    CompensatedSum acc(n);
    for (std::size_t i = i0 + 1; i < nodes.size(); ++i) {
        acc.add(piece(nodes[i - 1].t, nodes[i].t));
        out[i] = (nodes[i].q - nodes[i0].q - acc.value()).norm();
    }
    CompensatedSum back(n);
    for (std::size_t i = i0; i-- > 0;) {
        back.add(piece(nodes[i].t, nodes[i + 1].t));
        out[i] = (nodes[i].q - nodes[i0].q + back.value()).norm();
    }
    return out;
}

}  // namespace tscale
