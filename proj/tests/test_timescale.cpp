#include <doctest.h>

#include <random>

#include "tscale/timescale.hpp"

using namespace tscale;

namespace {

TimeScale unit_plus_two() { return TimeScale({Segment::interval(0, 1), Segment::point(2)}); }

}  // namespace

TEST_CASE("sigma, rho and graininess on [0,1] u {2}") {
    const TimeScale ts = unit_plus_two();
    CHECK(ts.sigma(1) == 2);
    CHECK(ts.sigma(0.5) == 0.5);
    CHECK(ts.sigma(2) == 2);
    CHECK(ts.rho(2) == 1);
    CHECK(ts.rho(0) == 0);
    CHECK(ts.graininess(1) == 1);
    CHECK(ts.graininess(0.3) == 0);
}

TEST_CASE("discrete scale operators") {
    const TimeScale ts({Segment::point(0), Segment::point(1), Segment::point(3)});
    CHECK(ts.rho(3) == 1);
    CHECK(ts.graininess(1) == 2);
    CHECK(ts.is_discrete());
    CHECK(ts.right_scattered_points() == std::vector<double>{0, 1});
}

TEST_CASE("classification") {
    const TimeScale ts = unit_plus_two();
    CHECK(ts.classify(1) == PointClass{LeftClass::dense, RightClass::scattered});
    CHECK(ts.classify(0) == PointClass{LeftClass::is_min, RightClass::dense});
    CHECK(ts.classify(2) == PointClass{LeftClass::scattered, RightClass::is_max});

    const TimeScale two({Segment::point(0), Segment::point(1)});
    CHECK(two.classify(0) == PointClass{LeftClass::is_min, RightClass::scattered});

    const TimeScale dense({Segment::interval(0, 2)});
    CHECK(dense.classify(1) == PointClass{LeftClass::dense, RightClass::dense});
}

TEST_CASE("membership is exact") {
    const TimeScale ts = unit_plus_two();
    CHECK(ts.contains(2.0));
    CHECK_FALSE(ts.contains(std::nextafter(2.0, 3.0)));
    CHECK_FALSE(ts.contains(1.5));
    CHECK_THROWS_AS(ts.sigma(1.5), TimeScaleError);
    CHECK_THROWS_AS(ts.classify(-0.1), TimeScaleError);
}

TEST_CASE("decompose") {
    const TimeScale a({Segment::interval(0, 1), Segment::point(2), Segment::point(3)});
    CHECK(a.decompose(0, 3) ==
          std::vector<Atom>{Atom::dense_run(0, 1), Atom::scattered_step(1, 2), Atom::scattered_step(2, 3)});

    const TimeScale b({Segment::point(0), Segment::point(1), Segment::point(2)});
    CHECK(b.decompose(0, 2) == std::vector<Atom>{Atom::scattered_step(0, 1), Atom::scattered_step(1, 2)});

    const TimeScale c({Segment::interval(0, 2)});
    CHECK(c.decompose(0.5, 1.5) == std::vector<Atom>{Atom::dense_run(0.5, 1.5)});

    CHECK_THROWS_AS(c.decompose(1, 1), TimeScaleError);
    CHECK_THROWS_AS(c.decompose(0, 3), TimeScaleError);
}

TEST_CASE("construction normalizes and reports") {
    const TimeScale ts({Segment::point(5), Segment::interval(0, 1), Segment::interval(1, 2), Segment::point(1.5),
                        Segment::point(5)});
    REQUIRE(ts.segments().size() == 2);
    CHECK(ts.segments()[0] == Segment::interval(0, 2));
    CHECK(ts.segments()[1] == Segment::point(5));
    CHECK_FALSE(ts.normalization_notes().empty());

    const TimeScale clean({Segment::interval(0, 1), Segment::point(2)});
    CHECK(clean.normalization_notes().empty());
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(TimeScale({Segment::point(1)}), TimeScaleError);
    CHECK_THROWS_AS(TimeScale({}), TimeScaleError);
    CHECK_THROWS_AS(Segment::interval(1, 0), TimeScaleError);
    CHECK_THROWS_AS(TimeScale({Segment::point(std::nan(""))}), TimeScaleError);
}

TEST_CASE("quantum scales") {
    const TimeScale q = make_quantum_scale(0.5, 3, false);
    CHECK(q.discrete_points() == std::vector<double>{0.25, 0.5, 1});
    const TimeScale z = make_quantum_scale(0.5, 2, true);
    CHECK(z.discrete_points() == std::vector<double>{0, 0.5, 1});
    const TimeScale t = make_quantum_scale(0.1, 2, false);
    CHECK(t.graininess(0.1) == doctest::Approx(0.9));
    CHECK_THROWS_AS(make_quantum_scale(1.0, 3, false), TimeScaleError);
    CHECK_THROWS_AS(make_quantum_scale(0.0, 3, false), TimeScaleError);
}

TEST_CASE("jump operator identities on random scales") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Segment> segs;
        double x = 0;
        for (int i = 0; i < 6; ++i) {
            if (u(rng) < 0.5) {
                segs.push_back(Segment::interval(x, x + 0.1 + u(rng)));
                x = segs.back().hi;
            } else {
                segs.push_back(Segment::point(x));
            }
            x += 0.01 + u(rng);
        }
        const TimeScale ts(segs);
        for (const Segment& s : ts.segments()) {
            for (double t : {s.lo, s.hi, 0.5 * (s.lo + s.hi)}) {
                CHECK(ts.rho(t) <= t);
                CHECK(t <= ts.sigma(t));
                CHECK(ts.contains(ts.sigma(t)));
                CHECK(ts.contains(ts.rho(t)));
                if (ts.left_scattered(t)) CHECK(ts.sigma(ts.rho(t)) == t);
                if (ts.right_scattered(t)) CHECK(ts.rho(ts.sigma(t)) == t);
                const PointClass pc = ts.classify(t);
                CHECK((pc.right == RightClass::dense) == (ts.sigma(t) == t && t != ts.max()));
            }
        }
        double total = 0;
        for (const Atom& a : ts.decompose(ts.min(), ts.max())) total += a.length();
        CHECK(total == doctest::Approx(ts.max() - ts.min()).epsilon(1e-12));
        const auto rs = ts.right_scattered_points();
        CHECK(rs.size() == ts.segments().size() - 1);
    }
}
