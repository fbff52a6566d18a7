#include <doctest.h>

#include <cmath>

#include "tscale/deltacalc.hpp"
#include "tscale/solver.hpp"

using namespace tscale;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

DynamicsSpec linear(double h) { return DynamicsSpec::builtin("linear", {{"h", {h}}}, 1); }
DynamicsSpec constant(double c) { return DynamicsSpec::builtin("constant", {{"c", {c}}}, 1); }
DynamicsSpec square() { return DynamicsSpec::builtin("square", {}, 1); }

TimeScale points(std::initializer_list<double> ts) {
    std::vector<Segment> segs;
    for (double t : ts) segs.push_back(Segment::point(t));
    return TimeScale(segs);
}

CauchyProblem problem(TimeScale ts, DynamicsSpec ds, double t0, double q0, bool shifted = false) {
    return CauchyProblem(std::move(ts), std::move(ds), DomainOmega::whole_space(1), t0, v1(q0), shifted);
}

}  // namespace

TEST_CASE("problem validation") {
    CHECK_THROWS_WITH(problem(points({0, 1}), constant(1), 0.5, 0), "t0 is not a point of the time scale");
    CHECK_THROWS_WITH(CauchyProblem(points({0, 1}), constant(1), DomainOmega::open_box(v1(-1), v1(1)), 0, v1(2),
                                    false),
                      "q0 not in omega");
    CHECK(problem(points({0, 1, 2}), constant(1), 0, 0).position() == Position::minimum);
    CHECK(problem(points({0, 1, 2}), constant(1), 1, 0).position() == Position::interior);
    CHECK(problem(points({0, 1, 2}), constant(1), 2, 0).position() == Position::maximum);
}

TEST_CASE("forward scattered steps are exact") {
    const Trajectory tr = solve_forward(problem(points({0, 0.5, 1}), linear(1), 0, 1));
    CHECK(tr.at(1)[0] == 2.25);
    CHECK(tr.at(0.5)[0] == 1.5);
}

TEST_CASE("backward non-shifted steps invert G+") {
    const Trajectory tr = solve_backward(problem(points({0, 0.5, 1}), linear(1), 1, 2.25));
    CHECK(tr.at(0)[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("backward shifted steps apply G-") {
    const Trajectory tr = solve_backward(problem(points({0, 1}), linear(1), 1, 1, true));
    CHECK(tr.at(0)[0] == 0.0);
}

TEST_CASE("regressivity failure going backward") {
    const auto cp = problem(points({0, 1}), DynamicsSpec::builtin("neg", {}, 1), 1, 1);
    try {
        solve_backward(cp);
        FAIL("expected ExistenceFailure");
    } catch (const ExistenceFailure& e) {
        CHECK(e.failure().kind == FailureKind::regressivity_failure);
        CHECK(e.failure().t == 0);
        CHECK(e.failure().direction == Direction::backward);
    }
    const Trajectory tr = solve(cp);
    CHECK(tr.interval.kind() == IntervalKind::existence_failure);
    REQUIRE(tr.failures.size() == 1);

    // q0 = 0: every x maps to 0, so a solution exists but is not unique.
    const Trajectory zero = solve(problem(points({0, 1}), DynamicsSpec::builtin("neg", {}, 1), 1, 0));
    CHECK(zero.interval.kind() == IntervalKind::global);
    CHECK_FALSE(zero.warnings.empty());
}

TEST_CASE("stability failure going forward") {
    const CauchyProblem cp(points({0, 1}), constant(1), DomainOmega::open_box(v1(-1), v1(1)), 0, v1(0), false);
    const Trajectory tr = solve(cp);
    CHECK(tr.interval.kind() == IntervalKind::existence_failure);
    REQUIRE(tr.failures.size() == 1);
    CHECK(tr.failures[0].kind == FailureKind::stability_violation);
    CHECK(tr.failures[0].t == 0);
    CHECK(tr.interval.upper.t == 0);
}

TEST_CASE("interior start on a discrete scale") {
    const Trajectory tr = solve(problem(points({-1, 0, 1}), constant(1), 0, 0));
    CHECK(tr.interval.kind() == IntervalKind::global);
    CHECK(tr.at(-1)[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(tr.at(1)[0] == 1.0);
}

TEST_CASE("interior start on an interval") {
    const Trajectory tr = solve(problem(TimeScale({Segment::interval(-1, 1)}), linear(1), 0, 1));
    CHECK(tr.interval.kind() == IntervalKind::global);
    CHECK(tr.interval.covers_scale);
    for (double t : {-1.0, -0.3, 0.0, 0.4, 1.0}) CHECK(tr.at(t)[0] == doctest::Approx(std::exp(t)).epsilon(1e-8));
}

TEST_CASE("blow-up on an interval") {
    const Trajectory tr = solve(problem(TimeScale({Segment::interval(0, 2)}), square(), 0, 1));
    CHECK(tr.interval.kind() == IntervalKind::forward_open);
    CHECK(tr.interval.upper.kind == EndKind::escape);
    CHECK(std::abs(tr.interval.upper.t - 1.0) <= 1e-3);
    REQUIRE(tr.interval.upper.evidence.has_value());
    CHECK(tr.interval.upper.evidence->norm > SolverConfig{}.escape.norm_cap);
    REQUIRE(tr.interval.upper.terminal_class.has_value());
    CHECK(tr.interval.upper.terminal_class->left == LeftClass::dense);
}

TEST_CASE("blow-up avoided by a scattered tail") {
    std::vector<Segment> segs{Segment::interval(0, 0.9)};
    for (int i = 0; i <= 10; ++i) segs.push_back(Segment::point(1.0 + 0.1 * i));
    const TimeScale ts(segs);
    const Trajectory tr = solve(problem(ts, square(), 0, 1));
    const double q09 = tr.at(0.9)[0];
    CHECK(q09 == doctest::Approx(10.0).epsilon(1e-7));
    CHECK(tr.at(1.0)[0] == q09 + ts.graininess(0.9) * (q09 * q09));
    CHECK(std::abs(tr.at(1.0)[0] - 20.0) <= 1e-6);
}

TEST_CASE("escape through the boundary of omega") {
    const CauchyProblem cp(TimeScale({Segment::interval(0, 3)}), constant(1), DomainOmega::open_box(v1(-1), v1(1)),
                           0, v1(0), false);
    const Trajectory tr = solve(cp);
    CHECK(tr.interval.upper.kind == EndKind::escape);
    CHECK(tr.interval.upper.t == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("sqrt dynamics from zero") {
    const Trajectory tr =
        solve(problem(TimeScale({Segment::interval(0, 4)}), DynamicsSpec::builtin("sqrt_abs", {}, 1), 0, 0));
    CHECK(tr.interval.kind() == IntervalKind::global);
    CHECK(tr.at(4)[0] == 0.0);
    bool warned = false;
    for (const auto& w : tr.warnings) warned |= w.find("unique") != std::string::npos;
    CHECK(warned);
}

TEST_CASE("roundtrip residuals") {
    CHECK(roundtrip_residual(problem(points({0, 0.5, 1}), linear(1), 0, 1)) <= 1e-10);
    CHECK(roundtrip_residual(problem(TimeScale({Segment::interval(0, 0.5)}), square(), 0, 1)) <= 1e-7);
    CHECK(roundtrip_residual(problem(TimeScale({Segment::interval(0, 1), Segment::point(2)}), constant(0), 0, 3)) ==
          0.0);
}

TEST_CASE("fundamental residual of computed trajectories") {
    const TimeScale ts({Segment::interval(0, 1), Segment::point(2)});
    const Trajectory id = solve(problem(ts, constant(1), 0, 0));
    CHECK(fundamental_check(ts, id, 0, 2) <= 1e-10);
    const Trajectory flat = solve(problem(ts, constant(0), 0, 5));
    CHECK(fundamental_check(ts, flat, 0, 2) == 0.0);
    const Trajectory ex = solve(problem(ts, linear(1), 0, 1));
    CHECK(ex.at(2)[0] == doctest::Approx(2 * std::exp(1.0)).epsilon(1e-8));
    CHECK(fundamental_check(ts, ex, 0, 2) <= 1e-8);
}

TEST_CASE("trajectory lookups") {
    const Trajectory tr = solve(problem(TimeScale({Segment::interval(0, 1), Segment::point(2)}), linear(1), 0, 1));
    CHECK_THROWS_AS(tr.at(1.5), std::out_of_range);
    CHECK(tr.find_node(2) != nullptr);
    CHECK(tr.find_dense(0.5) != nullptr);
    CHECK(tr.delta_derivative(TimeScale({Segment::interval(0, 1), Segment::point(2)}), 1)[0] ==
          doctest::Approx(std::exp(1.0)).epsilon(1e-8));
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    cfg.rel_tol = 0;
    CHECK_THROWS(cfg.validate());
}
