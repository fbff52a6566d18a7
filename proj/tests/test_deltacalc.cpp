#include <doctest.h>

#include <cmath>
#include <random>

#include "tscale/deltacalc.hpp"

using namespace tscale;

namespace {

TimeScale unit_plus_two() { return TimeScale({Segment::interval(0, 1), Segment::point(2)}); }

// Midpoint sum over the dense runs plus mu*g at scattered points.
double riemann(const TimeScale& ts, const ScalarFunction& g, double a, double b, int n = 200000) {
    double s = 0;
    for (const Atom& atom : ts.decompose(a, b)) {
        if (!atom.is_dense()) {
            s += atom.length() * g(atom.lo);
            continue;
        }
        const double h = atom.length() / n;
        for (int i = 0; i < n; ++i) s += h * g(atom.lo + (i + 0.5) * h);
    }
    return s;
}

}  // namespace

TEST_CASE("delta measure") {
    const TimeScale ts = unit_plus_two();
    CHECK(delta_measure(ts, 0, 2) == doctest::Approx(2.0));
    CHECK(delta_measure(ts, 0.25, 1) == doctest::Approx(0.75));
    CHECK(delta_measure(ts, 1, 2) == doctest::Approx(1.0));
    CHECK(delta_measure(ts, 2, 2) == 0.0);
}

TEST_CASE("integral of t over [0,1] u {2}") {
    const TimeScale ts = unit_plus_two();
    const ScalarIntegral r = delta_integral(ts, [](double t) { return t; }, 0, 2);
    CHECK(r.value == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(r.value == doctest::Approx(riemann(ts, [](double t) { return t; }, 0, 2)).epsilon(1e-8));
}

TEST_CASE("integral on a discrete scale is a weighted sum") {
    const TimeScale ts({Segment::point(0), Segment::point(1), Segment::point(3)});
    const ScalarIntegral r = delta_integral(ts, [](double t) { return t * t; }, 0, 3);
    CHECK(r.value == 0 * 1 + 1 * 2);
    CHECK(r.error_estimate == 0.0);
}

TEST_CASE("vector integral and reversed bounds") {
    const TimeScale ts({Segment::interval(0, 1)});
    const IntegralResult r =
        delta_integral(ts, [](double t) { return Vector{{std::sin(t), std::exp(t)}}; }, 0, 1);
    CHECK(r.value[0] == doctest::Approx(1 - std::cos(1.0)).epsilon(1e-12));
    CHECK(r.value[1] == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-12));
    CHECK_THROWS(delta_integral(ts, [](double t) { return t; }, 1, 0));
}

TEST_CASE("integral agrees with Riemann sums on mixed scales") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ScalarFunction g = [](double t) { return std::cos(3 * t) + t * t; };
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Segment> segs;
        double x = 0;
        for (int i = 0; i < 4; ++i) {
            if (u(rng) < 0.5) {
                segs.push_back(Segment::interval(x, x + 0.2 + u(rng)));
                x = segs.back().hi;
            } else {
                segs.push_back(Segment::point(x));
            }
            x += 0.05 + u(rng);
        }
        segs.push_back(Segment::point(x));
        const TimeScale ts(segs);
        const double v = delta_integral(ts, g, ts.min(), ts.max()).value;
        CHECK(v == doctest::Approx(riemann(ts, g, ts.min(), ts.max())).epsilon(1e-8));
    }
}

TEST_CASE("breakpoints handle a jump") {
    const TimeScale ts({Segment::interval(0, 2)});
    const std::vector<double> bp{std::sqrt(2.0)};
    const ScalarFunction step = [](double t) { return t < std::sqrt(2.0) ? 0.0 : 1.0; };
    const double v = delta_integral(ts, step, 0, 2, {}, bp).value;
    CHECK(v == doctest::Approx(2 - std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("delta derivative") {
    const TimeScale ts({Segment::interval(0, 1), Segment::point(3)});
    const ScalarFunction sq = [](double t) { return t * t; };

    const DerivativeResult at_gap = delta_derivative(ts, sq, 1);
    CHECK(at_gap.exact);
    CHECK(at_gap.value[0] == doctest::Approx(4.0));  // t + sigma(t)

    const DerivativeResult inside = delta_derivative(ts, sq, 0.5);
    CHECK_FALSE(inside.exact);
    CHECK(inside.value[0] == doctest::Approx(1.0).epsilon(1e-8));

    const DerivativeResult left_end = delta_derivative(ts, sq, 0);
    CHECK(left_end.value[0] == doctest::Approx(0.0).epsilon(1e-8));

    CHECK_THROWS_AS(delta_derivative(ts, sq, 3), DerivativeError);
}

TEST_CASE("derivative of exp stays inside a short run") {
    const TimeScale ts({Segment::interval(0, 1e-3), Segment::point(1)});
    const DerivativeResult r = delta_derivative(ts, [](double t) { return std::exp(t); }, 0.999e-3);
    CHECK(r.value[0] == doctest::Approx(std::exp(0.999e-3)).epsilon(1e-8));
}

TEST_CASE("quadrature config validation") {
    QuadratureConfig cfg;
    cfg.rel_tol = -1;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("derivative examples on discrete and mixed scales") {
    const TimeScale nat({Segment::point(0), Segment::point(1), Segment::point(2), Segment::point(3),
                         Segment::point(4), Segment::point(5)});
    CHECK(delta_derivative(nat, [](double t) { return t * t; }, 2).value[0] == 5.0);
    const TimeScale ts = unit_plus_two();
    CHECK(delta_derivative(ts, [](double t) { return t; }, 1).value[0] == 1.0);
}

TEST_CASE("small examples of the integral") {
    const TimeScale nat({Segment::point(0), Segment::point(1), Segment::point(2)});
    CHECK(delta_integral(nat, [](double) { return 1.0; }, 0, 2).value == 2.0);
    const TimeScale unit({Segment::interval(0, 1)});
    CHECK(delta_integral(unit, [](double t) { return t; }, 0, 1).value == doctest::Approx(0.5).epsilon(1e-14));
    const TimeScale disc({Segment::point(0), Segment::point(1), Segment::point(3)});
    CHECK(delta_measure(disc, 0, 3) == 3.0);
}
