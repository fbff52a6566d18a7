#include "tscale/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tscale/format.hpp"

namespace tscale {

const char* to_string(Position p) {
    switch (p) {
        case Position::minimum: return "min";
        case Position::maximum: return "max";
        case Position::interior: return "interior";
    }
    return "?";
}

CauchyProblem::CauchyProblem(TimeScale ts, DynamicsSpec ds, DomainOmega omega, double t0,
                             Vector q0, bool shifted)
    : ts_(std::move(ts)),
      ds_(std::move(ds)),
      omega_(std::move(omega)),
      t0_(t0),
      q0_(std::move(q0)),
      shifted_(shifted) {
    if (!ts_.contains(t0_)) throw std::invalid_argument("t0 is not a point of the time scale");
    if (ds_.dim() != omega_.dim())
        throw std::invalid_argument("dynamics and omega have different dimensions");
    if (q0_.size() != ds_.dim())
        throw std::invalid_argument("q0 has " + std::to_string(q0_.size()) +
                                    " components, expected " + std::to_string(ds_.dim()));
    if (!q0_.allFinite()) throw std::invalid_argument("q0 must be finite");
    if (!omega_.contains(q0_)) throw std::invalid_argument("q0 not in omega");
    position_ = t0_ == ts_.min()   ? Position::minimum
                : t0_ == ts_.max() ? Position::maximum
                                   : Position::interior;
}

CauchyProblem CauchyProblem::reanchored(double t, Vector q) const {
    return CauchyProblem(ts_, ds_, omega_, t, std::move(q), shifted_);
}

void SolverConfig::validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw std::invalid_argument("solver tolerances must be positive");
    if (!(escape.norm_cap > 0)) throw std::invalid_argument("escape.norm_cap must be positive");
    if (!(escape.boundary_eps > 0)) throw std::invalid_argument("escape.boundary_eps must be positive");
    if (!(max_span > 0)) throw std::invalid_argument("max_span must be positive");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (lipschitz_pairs < 2) throw std::invalid_argument("lipschitz_pairs must be >= 2");
    newton.validate();
}

ExistenceFailure::ExistenceFailure(Failure failure, Trajectory partial)
    : std::runtime_error(std::string(to_string(failure.kind)) + " at t=" + format_double(failure.t) +
                         ": " + failure.detail),
      failure_(std::move(failure)),
      partial_(std::move(partial)) {}

namespace {

// Dormand-Prince 5(4)
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2, a31 = 3.0 / 40.0, a32 = 9.0 / 40.0, a41 = 44.0 / 45.0,
                 a42 = -56.0 / 15.0, a43 = 32.0 / 9.0, a51 = 19372.0 / 6561.0,
                 a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0,
                 a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0, a71 = 35.0 / 384.0,
                 a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Breach {
    bool breached = false;
    double norm = 0.0;
    double distance = 0.0;
    std::string reason;
};

Breach check_breach(const Vector& y, const DomainOmega& omega, const EscapeConfig& esc) {
    Breach b;
    b.norm = y.norm();
    b.distance = omega.dist_to_complement(y);
    if (!y.allFinite()) {
        b.breached = true;
        b.reason = "state is not finite";
    } else if (b.norm > esc.norm_cap) {
        b.breached = true;
        b.reason = "norm exceeds norm_cap " + format_double(esc.norm_cap);
    } else if (b.distance < esc.boundary_eps) {
        b.breached = true;
        b.reason = "distance to the boundary of omega below boundary_eps " +
                   format_double(esc.boundary_eps);
    }
    return b;
}

struct RunResult {
    Vector y;
    bool escaped = false;
    double b = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    EscapeEvidence evidence;
};

// Integrates q' = f(q, t) over one dense piece from ta to tb (either
// direction), appending accepted steps to the trajectory.
class DenseIntegrator {
public:
    DenseIntegrator(const CauchyProblem& cp, const SolverConfig& cfg, Trajectory& traj)
        : cp_(cp), cfg_(cfg), traj_(traj) {}

    RunResult run(double ta, double tb, Vector y) {
        const double dir = tb > ta ? 1.0 : -1.0;
        const double run_len = std::abs(tb - ta);
        const bool start_breached = check_breach(y, cp_.omega(), cfg_.escape).breached;

        double t = ta;
        Vector k1;
        try {
            k1 = cp_.ds().evaluate(y, t);
        } catch (const EvaluationFault& e) {
            return underflow(ta, ta, dir, run_len, y, y, std::string("dynamics fault: ") + e.what());
        }
        double h = dir * std::min({initial_step(t, y, k1, dir, run_len), run_len, cfg_.max_span});
        bool rejected_last = false;

        while (t != tb) {
            if (++steps_ > cfg_.max_steps)
                throw std::runtime_error("dense-run integrator exceeded max_steps at t=" +
                                         format_double(t));
            bool last = false;
            if (std::abs(h) >= std::abs(tb - t) * (1.0 - 1e-12)) {
                h = tb - t;
                last = true;
            }
            const double h_min = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (std::abs(h) < h_min)
                return underflow(ta, t, dir, run_len, y, trial_, "step size underflow");

            double err = std::numeric_limits<double>::infinity();
            bool ok = attempt(t, y, k1, h, err);
            if (ok && err <= 1.0) {
                const double t_new = last ? tb : t + h;
                DenseSegment seg{t, t_new - t, dense_};
                const Breach br = check_breach(y1_, cp_.omega(), cfg_.escape);
                if (br.breached) {
                    if (start_breached && t == ta)
                        return escape_at(t_new, t, t_new, seg.value(t_new), br);
                    return bisect(seg, t, t_new, run_len);
                }
                traj_.add_dense(std::move(seg));
                traj_.add_node(t_new, y1_);
                t = t_new;
                y = y1_;
                k1 = k7_;
                const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2,
                                              rejected_last ? 1.0 : 5.0);
                h = dir * std::min(std::abs(h) * fac, cfg_.max_span);
                rejected_last = false;
            } else {
                const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9) : 0.2;
                h *= fac;
                rejected_last = true;
            }
        }
        RunResult res;
        res.y = std::move(y);
        return res;
    }

private:
    double initial_step(double t, const Vector& y, const Vector& f0, double dir, double run_len) {
        const Vector sk = (cfg_.abs_tol + cfg_.rel_tol * y.array().abs()).matrix();
        const double n = static_cast<double>(y.size());
        const double d0 = std::sqrt((y.array() / sk.array()).square().sum() / n);
        const double d1 = std::sqrt((f0.array() / sk.array()).square().sum() / n);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, run_len);
        double d2 = 0.0;
        try {
            const Vector y1 = y + dir * h0 * f0;
            const Vector f1 = cp_.ds().evaluate(y1, t + dir * h0);
            d2 = std::sqrt(((f1 - f0).array() / sk.array()).square().sum() / n) / h0;
        } catch (const EvaluationFault&) {
            return h0 * 1e-3;
        }
        if (!std::isfinite(d2)) return h0 * 1e-3;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min(100.0 * h0, h1);
    }

    bool attempt(double t, const Vector& y, const Vector& k1, double h, double& err) {
        const DynamicsSpec& f = cp_.ds();
        try {
            const Vector k2 = f.evaluate(y + h * (a21 * k1), t + c2 * h);
            const Vector k3 = f.evaluate(y + h * (a31 * k1 + a32 * k2), t + c3 * h);
            const Vector k4 = f.evaluate(y + h * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * h);
            const Vector k5 =
                f.evaluate(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * h);
            const Vector k6 = f.evaluate(
                y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + h);
            y1_ = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            trial_ = y1_;
            k7_ = f.evaluate(y1_, t + h);

            const Vector e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7_);
            const Vector sk =
                (cfg_.abs_tol + cfg_.rel_tol * y.array().abs().max(y1_.array().abs())).matrix();
            err = std::sqrt((e.array() / sk.array()).square().sum() / static_cast<double>(y.size()));
            if (!std::isfinite(err) || !y1_.allFinite() || !k7_.allFinite()) {
                err = std::numeric_limits<double>::infinity();
                return false;
            }
            const Vector ydiff = y1_ - y;
            const Vector bspl = h * k1 - ydiff;
            dense_[0] = y;
            dense_[1] = ydiff;
            dense_[2] = bspl;
            dense_[3] = ydiff - h * k7_ - bspl;
            dense_[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7_);
            return true;
        } catch (const EvaluationFault&) {
            err = std::numeric_limits<double>::infinity();
            return false;
        }
    }

    // First time in (inside, outside] where the interpolant leaves the compact.
    RunResult bisect(const DenseSegment& seg, double inside, double outside, double run_len) {
        const double resolution = 1e-6 * run_len;
        while (std::abs(outside - inside) > resolution) {
            const double mid = 0.5 * (inside + outside);
            if (mid == inside || mid == outside) break;
            if (check_breach(seg.value(mid), cp_.omega(), cfg_.escape).breached)
                outside = mid;
            else
                inside = mid;
        }
        const Vector q = seg.value(outside);
        Breach br = check_breach(q, cp_.omega(), cfg_.escape);
        if (!br.breached) br = check_breach(y1_, cp_.omega(), cfg_.escape);
        return escape_at(outside, inside, outside, q, br);
    }

    RunResult escape_at(double b, double t_in, double t_out, Vector q, const Breach& br) {
        RunResult res;
        res.escaped = true;
        res.b = b;
        res.bracket_lo = std::min(t_in, t_out);
        res.bracket_hi = std::max(t_in, t_out);
        res.evidence.t = b;
        res.evidence.norm = q.norm();
        res.evidence.boundary_distance = cp_.omega().dist_to_complement(q);
        res.evidence.q = std::move(q);
        res.evidence.reason = br.reason;
        return res;
    }

    // No step can be accepted from t: the solution cannot be continued on the
    // dense run. The endpoint is placed one minimal step past t so that it is
    // an interior (two-sided dense) point of the run.
    RunResult underflow(double ta, double t, double dir, double run_len, const Vector& y,
                        const Vector& trial, const std::string& why) {
        const double step = std::min(1e-6 * run_len, 0.5 * run_len);
        const double b = t == ta ? ta + dir * step : t;
        Breach br = check_breach(trial, cp_.omega(), cfg_.escape);
        if (!br.breached) br = check_breach(y, cp_.omega(), cfg_.escape);
        br.reason = why + (br.reason.empty() ? "" : "; " + br.reason);
        return escape_at(b, t, t == ta ? b : t, trial.size() ? trial : y, br);
    }

    const CauchyProblem& cp_;
    const SolverConfig& cfg_;
    Trajectory& traj_;
    long steps_ = 0;
    Vector y1_, k7_, trial_;
    std::array<Vector, 5> dense_;
};

// Sub-intervals of a dense run split at the dynamics' time breakpoints.
std::vector<double> run_cuts(const DynamicsSpec& ds, double lo, double hi) {
    std::vector<double> cuts{lo};
    for (double b : ds.breakpoints)
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(hi);
    return cuts;
}

void set_extremity(IntervalEnd& end, const TimeScale& ts, double t) {
    end.kind = EndKind::extremity;
    end.t = end.bracket_lo = end.bracket_hi = t;
    end.terminal_class = ts.classify(t);
    end.evidence.reset();
}

void set_escape(IntervalEnd& end, const TimeScale& ts, const RunResult& r) {
    end.kind = EndKind::escape;
    end.t = r.b;
    end.bracket_lo = r.bracket_lo;
    end.bracket_hi = r.bracket_hi;
    end.terminal_class = ts.classify(r.b);
    end.evidence = r.evidence;
}

// `reached` is the last point where the solution exists.
[[noreturn]] void fail(Trajectory& traj, IntervalEnd& end, const TimeScale& ts, double reached, Failure f) {
    end.kind = EndKind::failure;
    end.t = end.bracket_lo = end.bracket_hi = reached;
    end.terminal_class = ts.classify(reached);
    traj.finalize();
    throw ExistenceFailure(std::move(f), std::move(traj));
}

void note_overflow(Trajectory& traj, double t, const Vector& q) {
    if (q.allFinite()) return;
    const std::string w = "state overflowed to a non-finite value at t=" + format_double(t);
    if (traj.warnings.empty() || traj.warnings.back() != w) traj.warnings.push_back(w);
}

void note_non_unique(Trajectory& traj, double t) {
    traj.warnings.push_back("step map Jacobian is singular at the computed preimage at t=" +
                            format_double(t) + "; the solution need not be unique");
}

Failure make_failure(Direction dir, FailureKind kind, double t, const Vector& x,
                     std::optional<Vector> image, std::string detail) {
    Failure f;
    f.direction = dir;
    f.kind = kind;
    f.t = t;
    f.x = x;
    f.image = std::move(image);
    f.detail = std::move(detail);
    return f;
}

}  // namespace

Trajectory solve_forward(const CauchyProblem& cp, const SolverConfig& cfg, std::optional<double> until) {
    cfg.validate();
    const TimeScale& ts = cp.ts();
    const double t0 = cp.t0();
    const double t_stop = until.value_or(ts.max());
    if (!ts.contains(t_stop) || t_stop < t0)
        throw std::invalid_argument("forward stop point must be a point of T not below t0");

    Trajectory traj(static_cast<std::size_t>(cp.ds().dim()), t0, cp.q0());
    IntervalEnd& upper = traj.interval.upper;
    set_extremity(traj.interval.lower, ts, t0);
    set_extremity(upper, ts, t0);
    traj.interval.covers_scale = false;
    if (t_stop == t0) {
        traj.interval.covers_scale = t0 == ts.max();
        return traj;
    }

    Vector x = cp.q0();
    DenseIntegrator integrator(cp, cfg, traj);
    for (const Atom& atom : ts.decompose(t0, t_stop)) {
        if (atom.is_dense()) {
            const auto cuts = run_cuts(cp.ds(), atom.lo, atom.hi);
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                RunResult r = integrator.run(cuts[i], cuts[i + 1], x);
                if (r.escaped) {
                    set_escape(upper, ts, r);
                    traj.finalize();
                    return traj;
                }
                x = std::move(r.y);
            }
            continue;
        }
        const double t = atom.lo;
        const double mu = atom.hi - atom.lo;
        if (!cp.shifted()) {
            Vector image;
            try {
                image = scattered_map(cp.ds(), t, mu, x, StepVariant::plus);
            } catch (const EvaluationFault& e) {
                fail(traj, upper, ts, t,
                     make_failure(Direction::forward, FailureKind::evaluation_fault, t, x,
                                  std::nullopt, e.what()));
            }
            if (!cp.omega().contains(image))
                fail(traj, upper, ts, t,
                     make_failure(Direction::forward, FailureKind::stability_violation, t, x, image,
                                  "x + mu f(x,t) leaves omega"));
            x = std::move(image);
        } else {
            try {
                InversionResult inv = invert_scattered_map(cp.ds(), cp.omega(), t, mu, x,
                                                           StepVariant::minus, cfg.newton, x);
                if (inv.singular_at_solution) note_non_unique(traj, t);
                x = std::move(inv.x);
            } catch (const InversionError& e) {
                fail(traj, upper, ts, t,
                     make_failure(Direction::forward, FailureKind::regressivity_failure, t, x,
                                  std::nullopt,
                                  std::string(to_string(e.kind())) + ": " + e.what()));
            } catch (const EvaluationFault& e) {
                fail(traj, upper, ts, t,
                     make_failure(Direction::forward, FailureKind::evaluation_fault, t, x,
                                  std::nullopt, e.what()));
            }
        }
        note_overflow(traj, atom.hi, x);
        traj.add_node(atom.hi, x);
        upper.t = atom.hi;
    }
    set_extremity(upper, ts, t_stop);
    traj.interval.covers_scale = t_stop == ts.max();
    traj.finalize();
    return traj;
}

Trajectory solve_backward(const CauchyProblem& cp, const SolverConfig& cfg, std::optional<double> until) {
    cfg.validate();
    const TimeScale& ts = cp.ts();
    const double t0 = cp.t0();
    const double t_stop = until.value_or(ts.min());
    if (!ts.contains(t_stop) || t_stop > t0)
        throw std::invalid_argument("backward stop point must be a point of T not above t0");

    Trajectory traj(static_cast<std::size_t>(cp.ds().dim()), t0, cp.q0());
    IntervalEnd& lower = traj.interval.lower;
    set_extremity(lower, ts, t0);
    set_extremity(traj.interval.upper, ts, t0);
    traj.interval.covers_scale = false;
    if (t_stop == t0) {
        traj.interval.covers_scale = t0 == ts.min();
        return traj;
    }

    Vector x = cp.q0();
    DenseIntegrator integrator(cp, cfg, traj);
    const auto atoms = ts.decompose(t_stop, t0);
    for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
        const Atom& atom = *it;
        if (atom.is_dense()) {
            const auto cuts = run_cuts(cp.ds(), atom.lo, atom.hi);
            for (std::size_t i = cuts.size() - 1; i > 0; --i) {
                RunResult r = integrator.run(cuts[i], cuts[i - 1], x);
                if (r.escaped) {
                    set_escape(lower, ts, r);
                    traj.finalize();
                    return traj;
                }
                x = std::move(r.y);
            }
            continue;
        }
        const double t = atom.lo;
        const double mu = atom.hi - atom.lo;
        if (!cp.shifted()) {
            try {
                InversionResult inv = invert_scattered_map(cp.ds(), cp.omega(), t, mu, x,
                                                           StepVariant::plus, cfg.newton, x);
                if (inv.singular_at_solution) note_non_unique(traj, t);
                x = std::move(inv.x);
            } catch (const InversionError& e) {
                fail(traj, lower, ts, atom.hi,
                     make_failure(Direction::backward, FailureKind::regressivity_failure, t,
                                  x, std::nullopt,
                                  std::string(to_string(e.kind())) + " inverting x + mu f(x,t) at t=" +
                                      format_double(t) + ": " + e.what()));
            } catch (const EvaluationFault& e) {
                fail(traj, lower, ts, atom.hi,
                     make_failure(Direction::backward, FailureKind::evaluation_fault, t, x,
                                  std::nullopt, e.what()));
            }
        } else {
            Vector image;
            try {
                image = scattered_map(cp.ds(), t, mu, x, StepVariant::minus);
            } catch (const EvaluationFault& e) {
                fail(traj, lower, ts, atom.hi,
                     make_failure(Direction::backward, FailureKind::evaluation_fault, t, x,
                                  std::nullopt, e.what()));
            }
            if (!cp.omega().contains(image))
                fail(traj, lower, ts, atom.hi,
                     make_failure(Direction::backward, FailureKind::stability_violation, t,
                                  x, image, "x - mu f(x,t) leaves omega"));
            x = std::move(image);
        }
        note_overflow(traj, t, x);
        traj.add_node(t, x);
        lower.t = t;
    }
    set_extremity(lower, ts, t_stop);
    traj.interval.covers_scale = t_stop == ts.min();
    traj.finalize();
    return traj;
}

namespace {

Trajectory catching(const std::function<Trajectory()>& run) {
    try {
        return run();
    } catch (const ExistenceFailure& e) {
        Trajectory t = e.partial();
        t.failures.push_back(e.failure());
        return t;
    }
}

Trajectory trivial_half(const CauchyProblem& cp) {
    Trajectory t(static_cast<std::size_t>(cp.ds().dim()), cp.t0(), cp.q0());
    set_extremity(t.interval.lower, cp.ts(), cp.t0());
    set_extremity(t.interval.upper, cp.ts(), cp.t0());
    return t;
}

// Lipschitz probe around (t0, q0) on the dense segment containing t0.
std::optional<std::string> lipschitz_warning(const CauchyProblem& cp, const SolverConfig& cfg) {
    const TimeScale& ts = cp.ts();
    for (const Segment& s : ts.segments()) {
        if (s.is_point() || cp.t0() < s.lo || cp.t0() > s.hi) continue;
        const double dist = cp.omega().dist_to_complement(cp.q0());
        const double radius = std::min(0.1 * (1.0 + cp.q0().norm()), 0.5 * dist);
        if (!(radius > 0)) return std::nullopt;
        const LipschitzEstimate est = estimate_lipschitz(cp.ds(), cp.omega(), ts, cp.q0(), radius,
                                                         s.lo, s.hi, cfg.lipschitz_pairs, cfg.seed);
        if (!est.diverging) return std::nullopt;
        return "f does not look Lipschitz near q0 on the dense run containing t0 (difference "
               "quotients reach " +
               format_double(est.L_hat) + "); the solution need not be unique";
    }
    return std::nullopt;
}

}  // namespace

Trajectory solve(const CauchyProblem& cp, const SolverConfig& cfg) {
    cfg.validate();
    Trajectory out;
    switch (cp.position()) {
        case Position::minimum:
            out = catching([&] { return solve_forward(cp, cfg); });
            break;
        case Position::maximum:
            out = catching([&] { return solve_backward(cp, cfg); });
            break;
        case Position::interior: {
            Trajectory bwd = catching([&] { return solve_backward(cp, cfg); });
            Trajectory fwd = catching([&] { return solve_forward(cp, cfg); });
            out = Trajectory::merge(bwd, fwd);
            break;
        }
    }
    if (cp.position() == Position::minimum) {
        const Trajectory half = trivial_half(cp);
        out.interval.lower = half.interval.lower;
    } else if (cp.position() == Position::maximum) {
        const Trajectory half = trivial_half(cp);
        out.interval.upper = half.interval.upper;
    }
    out.interval.covers_scale = out.interval.lower.kind == EndKind::extremity &&
                                out.interval.upper.kind == EndKind::extremity &&
                                out.interval.lower.t == cp.ts().min() &&
                                out.interval.upper.t == cp.ts().max();
    if (cfg.lipschitz_check) {
        if (auto w = lipschitz_warning(cp, cfg)) out.warnings.push_back(*w);
    }
    return out;
}

double roundtrip_residual(const CauchyProblem& cp, const SolverConfig& cfg, std::optional<double> b) {
    const Trajectory fwd = solve_forward(cp, cfg, b);
    const Node& end = fwd.nodes().back();
    if (end.t == cp.t0()) return 0.0;
    const CauchyProblem reverse = cp.reanchored(end.t, end.q);
    const Trajectory back = solve_backward(reverse, cfg, cp.t0());
    const Node* n = back.find_node(cp.t0());
    if (!n) throw std::logic_error("backward solve did not reach t0");
    return (n->q - cp.q0()).norm();
}

}  // namespace tscale
