#include <doctest.h>

#include <algorithm>

#include "tscale/config.hpp"

using namespace tscale;
using nlohmann::json;

namespace {

const char* kStability = R"({
  "name": "stability",
  "timescale": [["point", 0], ["point", 1]],
  "dynamics": {"builtin": "constant", "params": {"c": 1}},
  "omega": {"type": "box", "lo": [-1], "hi": [1]},
  "q0": [0]
})";

bool mentions(const ConfigError& e, const std::string& needle) {
    return std::any_of(e.errors().begin(), e.errors().end(),
                       [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("valid problem loads") {
    const ProblemConfig cfg = parse_problem(parse_json(kStability, "inline"), "fallback");
    CHECK(cfg.name == "stability");
    CHECK(cfg.t0 == 0);
    CHECK(cfg.q0[0] == 0);
    CHECK(cfg.omega.contains(cfg.q0));
    CHECK(cfg.ts.is_discrete());
    CHECK_NOTHROW(cfg.problem());
    const json r = cfg.resolved();
    CHECK(r["solver"]["rel_tol"] == 1e-9);
    CHECK(r["omega"]["type"] == "box");
}

TEST_CASE("q0 outside omega") {
    json doc = parse_json(kStability, "inline");
    doc["q0"] = {2};
    try {
        parse_problem(doc, "x");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "q0 not in omega"));
    }
}

TEST_CASE("malformed JSON reports line and column") {
    try {
        parse_json("{\n  \"q0\": [0,\n  ]\n}", "bad.json");
        FAIL("expected ConfigParseError");
    } catch (const ConfigParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 3);
        CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
    }
}

TEST_CASE("unknown and mistyped fields") {
    json doc = parse_json(kStability, "inline");
    doc["solver"] = {{"rel_tol", 1e-8}, {"relative_tol", 1}};
    doc["t0"] = 0.5;
    try {
        parse_problem(doc, "x");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "relative_tol"));
        CHECK(mentions(e, "t0"));
    }
    doc = parse_json(kStability, "inline");
    doc["dynamics"] = {{"expr", "x1+"}, {"n", 1}};
    CHECK_THROWS_AS(parse_problem(doc, "x"), ConfigError);
}

TEST_CASE("time scale literals") {
    const TimeScale ts = parse_timescale(json::parse(R"([["interval", 0, 1], ["quantum", 0.5, 3, false], ["point", 2]])"));
    CHECK(ts.segments().size() == 2);  // the quantum points fall inside [0, 1]
    CHECK(ts.max() == 2);
    CHECK(parse_timescale(timescale_to_json(ts)).segments() == ts.segments());
    CHECK_THROWS(parse_timescale(json::parse(R"([["blob", 1]])")));
}

TEST_CASE("expression dynamics and ball omega") {
    const ProblemConfig cfg = parse_problem(json::parse(R"({
      "timescale": [["interval", 0, 1]],
      "dynamics": {"expr": "x2, -x1", "n": 2},
      "omega": {"type": "ball", "center": [0, 0], "radius": 2},
      "q0": [1, 0],
      "picard": {"tol": 1e-8},
      "check": {"box": {"lo": [0.5, -0.5], "hi": [1.5, 0.5]}}
    })"), "rot");
    CHECK(cfg.name == "rot");
    CHECK(cfg.ds.dim() == 2);
    CHECK(cfg.picard.tol == 1e-8);
    CHECK(cfg.check_box().hi[0] == 1.5);
}

TEST_CASE("default check box stays inside omega") {
    const ProblemConfig cfg = parse_problem(parse_json(kStability, "inline"), "x");
    const Box b = cfg.check_box();
    CHECK(cfg.omega.contains(b.lo));
    CHECK(cfg.omega.contains(b.hi));
}
