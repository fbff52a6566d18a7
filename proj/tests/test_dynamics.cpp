#include <doctest.h>

#include <cmath>
#include <random>

#include "tscale/dynamics.hpp"

using namespace tscale;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

DynamicsSpec linear(double h) { return DynamicsSpec::builtin("linear", {{"h", {h}}}, 1); }
DynamicsSpec constant(double c) { return DynamicsSpec::builtin("constant", {{"c", {c}}}, 1); }

TimeScale two_points() { return TimeScale({Segment::point(0), Segment::point(1)}); }

DomainOmega unit_interval() { return DomainOmega::open_box(v1(-1), v1(1)); }

Box box1(double lo, double hi) { return Box{v1(lo), v1(hi)}; }

}  // namespace

TEST_CASE("scattered maps") {
    CHECK(scattered_map(constant(1), 0, 1, v1(0), StepVariant::plus)[0] == 1);
    const DynamicsSpec neg = DynamicsSpec::builtin("neg", {}, 1);
    for (double c : {-3.0, 0.0, 0.7, 12.0}) CHECK(scattered_map(neg, 0, 1, v1(c), StepVariant::plus)[0] == 0);
    CHECK(scattered_map(linear(2), 0, 0.25, v1(4), StepVariant::minus)[0] == doctest::Approx((1 - 0.5) * 4));
}

TEST_CASE("evaluation faults") {
    const DynamicsSpec bad(1, [](const Vector&, double) { return Vector::Constant(2, 0.0); });
    CHECK_THROWS_AS(bad.evaluate(v1(0), 0), EvaluationFault);
    const DynamicsSpec nan = DynamicsSpec::from_expression("log(x1)", 1);
    CHECK_THROWS_AS(nan.evaluate(v1(-1), 0), EvaluationFault);
    CHECK_THROWS(DynamicsSpec::builtin("nope", {}, 1));
}

TEST_CASE("inversion of the linear step") {
    const auto omega = DomainOmega::whole_space(1);
    const InversionResult r =
        invert_scattered_map(linear(1), omega, 0, 0.5, v1(3), StepVariant::plus, {}, v1(3));
    CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(r.singular_at_solution);
}

TEST_CASE("inversion of the quadratic step") {
    const auto omega = DomainOmega::whole_space(1);
    const DynamicsSpec sq = DynamicsSpec::builtin("square", {}, 1);
    const Vector y = scattered_map(sq, 0, 0.1, v1(2.0), StepVariant::plus);
    CHECK(y[0] == doctest::Approx(2.4));
    const InversionResult r = invert_scattered_map(sq, omega, 0, 0.1, y, StepVariant::plus, {}, y);
    CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("non-invertible step map") {
    const auto omega = DomainOmega::whole_space(1);
    const DynamicsSpec neg = DynamicsSpec::builtin("neg", {}, 1);
    try {
        invert_scattered_map(neg, omega, 0, 1, v1(1), StepVariant::plus, {}, v1(1));
        FAIL("expected InversionError");
    } catch (const InversionError& e) {
        CHECK((e.kind() == InversionError::Kind::singular_jacobian ||
               e.kind() == InversionError::Kind::no_convergence));
    }
    // y = 0 is reached by every x; the preimage exists but is not unique.
    const InversionResult r = invert_scattered_map(neg, omega, 0, 1, v1(0), StepVariant::plus, {}, v1(0));
    CHECK(r.singular_at_solution);
}

TEST_CASE("preimage outside omega") {
    // x + 1 = 0.5 needs x = -0.5, outside (0, 1).
    const auto omega = DomainOmega::open_box(v1(0), v1(1));
    try {
        invert_scattered_map(constant(1), omega, 0, 1, v1(0.5), StepVariant::plus, {}, v1(0.5));
        FAIL("expected InversionError");
    } catch (const InversionError& e) {
        CHECK(e.kind() == InversionError::Kind::outside_omega);
        CHECK(std::string(to_string(e.kind())) == "SolutionOutsideOmega");
    }
}

TEST_CASE("stability checks") {
    const auto omega = unit_interval();
    const StabilityReport fwd = check_forward_stability(constant(1), omega, two_points(), box1(-0.5, 0.5), 9);
    CHECK_FALSE(fwd.passed());
    CHECK(fwd.tested == 9);
    // x + 1 leaves (-1, 1) exactly when x >= 0.
    CHECK(fwd.violations.size() == 5);
    for (const auto& v : fwd.violations) {
        CHECK(v.t == 0);
        CHECK(v.x[0] >= 0);
    }

    const StabilityReport bwd = check_backward_stability(constant(1), omega, two_points(), box1(-0.5, 0.5), 9);
    CHECK_FALSE(bwd.passed());
    CHECK(bwd.violations.size() == 5);
    for (const auto& v : bwd.violations) CHECK(v.x[0] <= 0);

    CHECK(check_forward_stability(constant(0), omega, two_points(), box1(-0.5, 0.5), 9).passed());
    CHECK(check_backward_stability(constant(0), omega, two_points(), box1(-0.5, 0.5), 9).passed());

    const TimeScale dense({Segment::interval(0, 1)});
    const StabilityReport vac = check_forward_stability(constant(1), omega, dense, box1(-0.5, 0.5), 9);
    CHECK(vac.passed());
    CHECK(vac.tested == 0);
    CHECK(check_backward_stability(constant(1), omega, dense, box1(-0.5, 0.5), 9).passed());
}

TEST_CASE("regressivity probes") {
    const DynamicsSpec neg = DynamicsSpec::builtin("neg", {}, 1);
    const RegressivityReport r = check_regressivity(neg, two_points(), box1(-1, 1), 5, StepVariant::plus);
    CHECK_FALSE(r.passed());
    CHECK_FALSE(r.singular.empty());
    CHECK(check_regressivity(linear(1), two_points(), box1(-1, 1), 5, StepVariant::plus).passed());
    // det(1 - mu h) with h = 1, mu = 1 is zero.
    CHECK_FALSE(check_regressivity(linear(1), two_points(), box1(-1, 1), 5, StepVariant::minus).passed());
}

TEST_CASE("Lipschitz estimates") {
    const auto omega = DomainOmega::whole_space(1);
    const TimeScale ts({Segment::interval(0, 1)});
    for (double h : {-2.0, 0.5, 3.0}) {
        const LipschitzEstimate e = estimate_lipschitz(linear(h), omega, ts, v1(0.3), 1.0, 0, 1, 128, 1);
        CHECK(e.L_hat == doctest::Approx(std::abs(h)).epsilon(0.05));
        CHECK_FALSE(e.diverging);
    }

    // Oracle: sup |2x| over [0.5, 1.5] on a fine grid.
    double sup = 0;
    for (int i = 0; i <= 10000; ++i) sup = std::max(sup, std::abs(2 * (0.5 + i * 1e-4)));
    const DynamicsSpec sq = DynamicsSpec::builtin("square", {}, 1);
    const LipschitzEstimate e = estimate_lipschitz(sq, omega, ts, v1(1), 0.5, 0, 1, 256, 2);
    CHECK(e.L_hat == doctest::Approx(sup).epsilon(0.05));
    CHECK(e.L_hat <= sup * (1 + 1e-9));
    CHECK_FALSE(e.diverging);

    const DynamicsSpec root = DynamicsSpec::builtin("sqrt_abs", {}, 1);
    const LipschitzEstimate d = estimate_lipschitz(root, omega, ts, v1(0), 0.1, 0, 1, 64, 3);
    CHECK(d.diverging);
    CHECK(d.separations.size() == d.max_ratio.size());
}

TEST_CASE("local bound") {
    const TimeScale ts({Segment::interval(0, 1), Segment::point(2)});
    const DynamicsSpec sq = DynamicsSpec::builtin("square", {}, 1);
    const BoundReport b = check_local_bound(sq, ts, box1(-3, 2), 11);
    CHECK(b.max_norm == doctest::Approx(9.0));
    CHECK(b.argmax_x[0] == -3);
}

TEST_CASE("parsed dynamics match the builtin catalog") {
    struct Pair {
        DynamicsSpec builtin;
        DynamicsSpec parsed;
    };
    const std::vector<Pair> pairs{
        {DynamicsSpec::builtin("linear", {{"h", {1.5}}}, 2), DynamicsSpec::from_expression("1.5*x1, 1.5*x2", 2)},
        {DynamicsSpec::builtin("square", {}, 1), DynamicsSpec::from_expression("x1^2", 1)},
        {DynamicsSpec::builtin("sqrt_abs", {}, 1), DynamicsSpec::from_expression("2*sqrt(abs(x1))", 1)},
        {DynamicsSpec::builtin("neg", {}, 1), DynamicsSpec::from_expression("-x1", 1)},
        {DynamicsSpec::builtin("constant", {{"c", {1, -2}}}, 2), DynamicsSpec::from_expression("1, -2", 2)},
    };
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (const Pair& p : pairs) {
        const int n = p.builtin.dim();
        for (int i = 0; i < 1000; ++i) {
            Vector x(n);
            for (int k = 0; k < n; ++k) x[k] = u(rng);
            const double t = u(rng);
            const Vector a = p.builtin.evaluate(x, t);
            const Vector b = p.parsed.evaluate(x, t);
            CHECK((a - b).norm() <= 4 * std::numeric_limits<double>::epsilon() * (1 + a.norm()));
        }
    }
}

TEST_CASE("finite-difference Jacobian") {
    const DynamicsSpec parsed = DynamicsSpec::from_expression("x1*x2, sin(x1)", 2);
    CHECK_FALSE(parsed.has_analytic_jacobian());
    const Matrix J = parsed.jacobian(Vector{{0.5, 2.0}}, 0);
    CHECK(J(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(J(0, 1) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(J(1, 0) == doctest::Approx(std::cos(0.5)).epsilon(1e-8));
    CHECK(J(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("box lattice") {
    const Box b{Vector{{0, 0}}, Vector{{1, 2}}};
    const auto pts = box_lattice(b, 3);
    CHECK(pts.size() == 9);
    CHECK(box_lattice(b, 1).front() == Vector{{0.5, 1.0}});
}
