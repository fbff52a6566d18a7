#include <doctest.h>

#include <cmath>

#include "tscale/picard.hpp"

using namespace tscale;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

TimeScale points(std::initializer_list<double> ts) {
    std::vector<Segment> segs;
    for (double t : ts) segs.push_back(Segment::point(t));
    return TimeScale(segs);
}

CauchyProblem problem(TimeScale ts, DynamicsSpec ds, double t0, double q0, bool shifted = false) {
    return CauchyProblem(std::move(ts), std::move(ds), DomainOmega::whole_space(1), t0, v1(q0), shifted);
}

DynamicsSpec linear(double h) { return DynamicsSpec::builtin("linear", {{"h", {h}}}, 1); }

}  // namespace

TEST_CASE("operator on a constant field") {
    const TimeScale ts({Segment::interval(0, 1), Segment::point(2)});
    const auto cp = problem(ts, DynamicsSpec::builtin("constant", {{"c", {3}}}, 1), 0, 1);
    const GridFunction g0 = build_grid(ts, 0, 2, 0);
    const GridFunction g = sample_on(g0, [](double) { return v1(1); });
    const GridFunction F = picard_operator(cp, g);
    for (std::size_t i = 0; i < F.size(); ++i)
        CHECK(F.values[i][0] == doctest::Approx(1 + 3 * F.grid[i]).epsilon(1e-13));
}

TEST_CASE("operator on a single scattered step") {
    const auto cp = problem(points({0, 1}), DynamicsSpec::from_expression("x1^2 + 1", 1), 0, 2);
    const GridFunction g = sample_on(build_grid(cp.ts(), 0, 1, 0), [](double t) { return v1(2 + t); });
    CHECK(picard_operator(cp, g).at(1)[0] == 2 + 5);
}

TEST_CASE("operator rejects states outside omega") {
    const CauchyProblem cp(points({0, 1}), linear(1), DomainOmega::open_box(v1(-1), v1(1)), 0, v1(0), false);
    const GridFunction g = sample_on(build_grid(cp.ts(), 0, 1, 0), [](double) { return v1(5); });
    CHECK_THROWS_AS(picard_operator(cp, g), PicardError);
}

TEST_CASE("constant field converges in two applications") {
    const auto cp = problem(TimeScale({Segment::interval(0, 1)}), DynamicsSpec::builtin("constant", {{"c", {2}}}, 1),
                            0, 0);
    const PicardResult r = picard_iterate(cp, 0, 1);
    CHECK(r.converged);
    CHECK(r.iterations == 2);
    CHECK(r.gaps.back() == 0.0);
}

TEST_CASE("discrete scales converge in at most #points applications") {
    const auto cp = problem(points({0, 0.5, 1.5, 2, 3}), DynamicsSpec::from_expression("x1^2/4 - t", 1), 0, 0.5);
    const PicardResult r = picard_iterate(cp, 0, 3);
    CHECK(r.converged);
    CHECK(r.iterations <= 5);
    CHECK(r.gaps.back() == 0.0);
}

TEST_CASE("linear field converges geometrically") {
    const auto cp = problem(TimeScale({Segment::interval(0, 0.5)}), linear(1), 0, 1);
    const PicardResult r = picard_iterate(cp, 0, 0.5);
    CHECK(r.converged);
    CHECK_FALSE(r.diverging);
    for (double ratio : r.ratios) CHECK(ratio < 0.55);
    CHECK(r.fixed_point.at(0.5)[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-6));
}

TEST_CASE("divergence is detected") {
    const auto cp = problem(TimeScale({Segment::interval(0, 5)}), linear(4), 0, 1);
    PicardConfig cfg;
    cfg.max_iter = 60;
    const PicardResult r = picard_iterate(cp, 0, 5, cfg);
    CHECK_FALSE(r.converged);
}

TEST_CASE("solver trajectory is a fixed point") {
    const TimeScale ts({Segment::interval(0, 1), Segment::point(1.5), Segment::interval(2, 2.5)});
    const auto cp = problem(ts, linear(0.7), 0, 1);
    const Trajectory tr = solve(cp);
    PicardConfig cfg;
    cfg.max_panel = 5e-4;
    const GridFunction g = sample_on(build_grid(ts, 0, 2.5, 0, cfg), [&](double t) { return tr.at(t); });
    CHECK(sup_distance(picard_operator(cp, g, cfg), g) <= 1e-6);
}

TEST_CASE("two solutions of the sqrt problem") {
    const auto cp = problem(TimeScale({Segment::interval(0, 4)}), DynamicsSpec::builtin("sqrt_abs", {}, 1), 0, 0);
    PicardConfig cfg;
    cfg.max_panel = 5e-5;
    const GridFunction shape = build_grid(cp.ts(), 0, 4, 0, cfg);
    const GridFunction zero = sample_on(shape, [](double) { return v1(0); });
    const GridFunction parab = sample_on(shape, [](double t) { return v1(t * t); });
    CHECK(sup_distance(picard_operator(cp, zero, cfg), zero) == 0.0);
    CHECK(sup_distance(picard_operator(cp, parab, cfg), parab) <= 1e-8);
}

TEST_CASE("delta exponential") {
    const ScalarFunction one = [](double) { return 1.0; };
    CHECK(delta_exponential(TimeScale({Segment::interval(0, 1)}), one, 0, 1) ==
          doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(delta_exponential(points({0, 0.5, 1}), one, 0, 1) == 2.25);
    const TimeScale mixed({Segment::interval(0, 1), Segment::point(1.5)});
    const double v = delta_exponential(mixed, one, 0, 1.5);
    CHECK(v == doctest::Approx(4.077422743).epsilon(1e-9));

    // Oracle: explicit Euler on a fine grid for the dense part.
    double q = 1;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) q *= 1 + 1.0 / n;
    CHECK(v == doctest::Approx(q * 1.5).epsilon(1e-6));

    CHECK_THROWS_AS(delta_exponential(points({0, 1}), [](double) { return -1.0; }, 0, 1), std::domain_error);
}

TEST_CASE("growth lemma") {
    const TimeScale nat = points({0, 1, 2});
    const GrowthCheck k0 = verify_growth_lemma(nat, 0, 0, 2, Direction::forward);
    CHECK(k0.equal);
    CHECK(k0.lhs == 2.0);

    const GrowthCheck k1 = verify_growth_lemma(nat, 0, 1, 2, Direction::forward);
    CHECK(k1.lhs == 1.0);
    CHECK(k1.rhs == 2.0);
    CHECK(k1.holds);
    CHECK_FALSE(k1.equal);

    const GrowthCheck dense = verify_growth_lemma(TimeScale({Segment::interval(0, 1)}), 0, 1, 1, Direction::forward);
    CHECK(dense.lhs == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(dense.equal);

    const GrowthCheck back = verify_growth_lemma(nat, 2, 1, 0, Direction::backward);
    CHECK(back.holds);
    CHECK(back.lhs == 1.0);  // (2 - 1) + (2 - 2)

    const TimeScale q = make_quantum_scale(0.5, 6, true);
    for (int k = 0; k <= 4; ++k) CHECK(verify_growth_lemma(q, 0, k, 1, Direction::forward).holds);
}
