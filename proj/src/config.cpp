#include "tscale/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tscale/format.hpp"

namespace tscale {

using nlohmann::json;

ConfigParseError::ConfigParseError(const std::string& source, int line, int column,
                                   const std::string& detail)
    : std::runtime_error(source + ": parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + detail),
      line_(line),
      column_(column) {}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::string out = "invalid configuration:";
    for (const auto& e : errors) out += "\n  " + e;
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is 1-based and points one past the offending character
        const std::size_t at = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
        int line = 1, column = 1;
        for (std::size_t i = 0; i < at; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string detail = e.what();
        if (auto p = detail.find("parse error"); p != std::string::npos) detail = detail.substr(p);
        throw ConfigParseError(source, line, column, detail);
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str(), path);
}

namespace {

// Collects field-level errors while reading a JSON object.
class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const std::string& field, const std::string& msg) { errors_.push_back(field + ": " + msg); }

    void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) return;
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, value] : obj.items())
            if (!ok.count(key)) error(where.empty() ? key : where + "." + key, "unknown field");
    }

    static std::optional<double> as_number(const json& v, bool allow_infinite) {
        if (v.is_number()) return v.get<double>();
        if (allow_infinite) {
            if (v.is_null()) return std::nullopt;
            if (v.is_string()) {
                const auto s = v.get<std::string>();
                if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
                if (s == "-inf") return -std::numeric_limits<double>::infinity();
            }
        }
        return std::nullopt;
    }

    template <class T>
    void number(const json& obj, const char* key, const std::string& field, T& out) {
        if (!obj.is_object() || !obj.contains(key)) return;
        const json& v = obj.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) return error(field, "expected true or false");
            out = v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() && !v.is_number_unsigned()) return error(field, "expected an integer");
            out = v.get<T>();
        } else {
            auto d = as_number(v, true);
            if (!d) return error(field, "expected a number");
            out = *d;
        }
    }

    std::optional<Vector> vector(const json& v, const std::string& field, bool allow_infinite,
                                 std::optional<double> null_value = std::nullopt) {
        std::vector<double> xs;
        if (v.is_number()) {
            xs.push_back(v.get<double>());
        } else if (v.is_array() && !v.empty()) {
            for (const auto& e : v) {
                auto d = as_number(e, allow_infinite);
                if (!d && e.is_null() && null_value) d = null_value;
                if (!d) {
                    error(field, "expected numbers");
                    return std::nullopt;
                }
                xs.push_back(*d);
            }
        } else {
            error(field, "expected a number or a non-empty array of numbers");
            return std::nullopt;
        }
        return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    }

private:
    std::vector<std::string>& errors_;
};

Vector broadcast(const Vector& v, Eigen::Index n) {
    if (v.size() == n) return v;
    return Vector::Constant(n, v[0]);
}

}  // namespace

TimeScale parse_timescale(const json& literal) {
    if (!literal.is_array() || literal.empty())
        throw std::invalid_argument("timescale: expected a non-empty list of entries");
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < literal.size(); ++i) {
        const json& e = literal[i];
        const std::string where = "timescale[" + std::to_string(i) + "]";
        if (!e.is_array() || e.empty() || !e[0].is_string())
            throw std::invalid_argument(where + ": expected [\"interval\", lo, hi], [\"point\", t] or "
                                        "[\"quantum\", lambda, n, include_zero]");
        const auto kind = e[0].get<std::string>();
        auto num = [&](std::size_t k) {
            if (k >= e.size() || !e[k].is_number())
                throw std::invalid_argument(where + ": entry " + std::to_string(k) + " must be a number");
            return e[k].get<double>();
        };
        if (kind == "interval") {
            if (e.size() != 3) throw std::invalid_argument(where + ": interval takes lo and hi");
            segs.push_back(Segment::interval(num(1), num(2)));
        } else if (kind == "point") {
            if (e.size() != 2) throw std::invalid_argument(where + ": point takes one value");
            segs.push_back(Segment::point(num(1)));
        } else if (kind == "quantum") {
            if (e.size() != 4 || !e[2].is_number_integer() || !e[3].is_boolean())
                throw std::invalid_argument(where + ": quantum takes lambda, n_points (integer), include_zero (bool)");
            const TimeScale q = make_quantum_scale(num(1), e[2].get<int>(), e[3].get<bool>());
            segs.insert(segs.end(), q.segments().begin(), q.segments().end());
        } else {
            throw std::invalid_argument(where + ": unknown entry kind '" + kind + "'");
        }
    }
    return TimeScale(std::move(segs));
}

json timescale_to_json(const TimeScale& ts) {
    json out = json::array();
    for (const Segment& s : ts.segments()) {
        if (s.is_point())
            out.push_back({"point", s.lo});
        else
            out.push_back({"interval", s.lo, s.hi});
    }
    return out;
}

namespace {

std::optional<DynamicsSpec> parse_dynamics_entry(const json& d, Reader& r, Eigen::Index n_hint) {
    if (!d.is_object()) {
        r.error("dynamics", "expected {\"builtin\": name, \"params\": {...}} or {\"expr\": text, \"n\": k}");
        return std::nullopt;
    }
    r.check_keys(d, "dynamics", {"builtin", "params", "expr", "n", "breakpoints"});
    int n = static_cast<int>(n_hint);
    if (d.contains("n")) {
        if (!d["n"].is_number_integer() || d["n"].get<int>() < 1) {
            r.error("dynamics.n", "expected a positive integer");
            return std::nullopt;
        }
        n = d["n"].get<int>();
    }
    if (n < 1) {
        r.error("dynamics.n", "dimension is unknown (give n or q0)");
        return std::nullopt;
    }
    std::optional<DynamicsSpec> ds;
    try {
        if (d.contains("expr")) {
            if (!d["expr"].is_string()) {
                r.error("dynamics.expr", "expected a string");
                return std::nullopt;
            }
            ds = DynamicsSpec::from_expression(d["expr"].get<std::string>(), n);
        } else if (d.contains("builtin")) {
            if (!d["builtin"].is_string()) {
                r.error("dynamics.builtin", "expected a string");
                return std::nullopt;
            }
            std::map<std::string, std::vector<double>> params;
            if (d.contains("params")) {
                if (!d["params"].is_object()) {
                    r.error("dynamics.params", "expected an object");
                    return std::nullopt;
                }
                for (const auto& [key, value] : d["params"].items()) {
                    auto v = r.vector(value, "dynamics.params." + key, false);
                    if (!v) return std::nullopt;
                    params[key] = std::vector<double>(v->data(), v->data() + v->size());
                }
            }
            ds = DynamicsSpec::builtin(d["builtin"].get<std::string>(), params, n);
        } else {
            r.error("dynamics", "needs either \"builtin\" or \"expr\"");
            return std::nullopt;
        }
    } catch (const ParseError& e) {
        r.error("dynamics.expr", e.what());
        return std::nullopt;
    } catch (const std::invalid_argument& e) {
        r.error("dynamics", e.what());
        return std::nullopt;
    }
    if (d.contains("breakpoints")) {
        if (auto b = r.vector(d["breakpoints"], "dynamics.breakpoints", false))
            ds->breakpoints.assign(b->data(), b->data() + b->size());
    }
    return ds;
}

std::optional<DomainOmega> parse_omega(const json& o, Reader& r, Eigen::Index n) {
    if (o.is_null()) return DomainOmega::whole_space(n);
    if (!o.is_object() || !o.contains("type") || !o["type"].is_string()) {
        r.error("omega", "expected {\"type\": \"whole\" | \"box\" | \"ball\", ...}");
        return std::nullopt;
    }
    const auto type = o["type"].get<std::string>();
    try {
        if (type == "whole") {
            r.check_keys(o, "omega", {"type"});
            return DomainOmega::whole_space(n);
        }
        if (type == "box") {
            r.check_keys(o, "omega", {"type", "lo", "hi"});
            const double inf = std::numeric_limits<double>::infinity();
            auto lo = o.contains("lo") ? r.vector(o["lo"], "omega.lo", true, -inf) : Vector::Constant(n, -inf);
            auto hi = o.contains("hi") ? r.vector(o["hi"], "omega.hi", true, inf) : Vector::Constant(n, inf);
            if (!lo || !hi) return std::nullopt;
            if ((lo->size() != 1 && lo->size() != n) || (hi->size() != 1 && hi->size() != n)) {
                r.error("omega", "bounds must have 1 or n entries");
                return std::nullopt;
            }
            return DomainOmega::open_box(broadcast(*lo, n), broadcast(*hi, n));
        }
        if (type == "ball") {
            r.check_keys(o, "omega", {"type", "center", "radius"});
            auto c = o.contains("center") ? r.vector(o["center"], "omega.center", false) : Vector::Zero(n);
            if (!c) return std::nullopt;
            if (!o.contains("radius") || !o["radius"].is_number()) {
                r.error("omega.radius", "expected a number");
                return std::nullopt;
            }
            if (c->size() != 1 && c->size() != n) {
                r.error("omega.center", "must have 1 or n entries");
                return std::nullopt;
            }
            return DomainOmega::open_ball(broadcast(*c, n), o["radius"].get<double>());
        }
    } catch (const std::invalid_argument& e) {
        r.error("omega", e.what());
        return std::nullopt;
    }
    r.error("omega.type", "unknown type '" + type + "'");
    return std::nullopt;
}

}  // namespace

ProblemConfig parse_problem(const json& doc, const std::string& name) {
    std::vector<std::string> errors;
    Reader r(errors);
    if (!doc.is_object()) throw ConfigError({"(root): expected a JSON object"});
    r.check_keys(doc, "", {"name", "timescale", "dynamics", "omega", "t0", "q0", "shifted", "solver",
                           "newton", "quadrature", "picard", "check", "output"});

    std::optional<TimeScale> ts;
    if (!doc.contains("timescale")) {
        r.error("timescale", "required");
    } else {
        try {
            ts = parse_timescale(doc["timescale"]);
        } catch (const std::invalid_argument& e) {
            r.error("timescale", e.what());
        }
    }

    std::optional<Vector> q0;
    if (!doc.contains("q0"))
        r.error("q0", "required");
    else
        q0 = r.vector(doc["q0"], "q0", false);

    Eigen::Index n = q0 ? q0->size() : 0;
    std::optional<DynamicsSpec> ds;
    if (!doc.contains("dynamics"))
        r.error("dynamics", "required");
    else
        ds = parse_dynamics_entry(doc["dynamics"], r, n);
    if (ds) {
        if (q0 && q0->size() == 1 && ds->dim() > 1) q0 = broadcast(*q0, ds->dim());
        n = ds->dim();
    }
    if (q0 && ds && q0->size() != ds->dim())
        r.error("q0", "has " + std::to_string(q0->size()) + " components, dynamics has dimension " +
                          std::to_string(ds->dim()));

    std::optional<DomainOmega> omega;
    if (n >= 1) omega = parse_omega(doc.value("omega", json()), r, n);

    double t0 = std::numeric_limits<double>::quiet_NaN();
    if (!doc.contains("t0")) {
        if (ts) t0 = ts->min();
    } else if (!doc["t0"].is_number()) {
        r.error("t0", "expected a number");
    } else {
        t0 = doc["t0"].get<double>();
        if (ts && !ts->contains(t0)) r.error("t0", "t0 not in timescale (membership is exact)");
    }
    if (q0 && !q0->allFinite()) r.error("q0", "must be finite");
    if (q0 && omega && q0->size() == omega->dim() && !omega->contains(*q0)) r.error("q0", "q0 not in omega");

    bool shifted = false;
    r.number(doc, "shifted", "shifted", shifted);

    SolverConfig solver;
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        r.check_keys(s, "solver", {"rel_tol", "abs_tol", "max_span", "max_steps", "norm_cap",
                                   "boundary_eps", "lipschitz_check", "lipschitz_pairs", "seed"});
        r.number(s, "rel_tol", "solver.rel_tol", solver.rel_tol);
        r.number(s, "abs_tol", "solver.abs_tol", solver.abs_tol);
        r.number(s, "max_span", "solver.max_span", solver.max_span);
        r.number(s, "max_steps", "solver.max_steps", solver.max_steps);
        r.number(s, "norm_cap", "solver.norm_cap", solver.escape.norm_cap);
        r.number(s, "boundary_eps", "solver.boundary_eps", solver.escape.boundary_eps);
        r.number(s, "lipschitz_check", "solver.lipschitz_check", solver.lipschitz_check);
        r.number(s, "lipschitz_pairs", "solver.lipschitz_pairs", solver.lipschitz_pairs);
        r.number(s, "seed", "solver.seed", solver.seed);
    }
    if (doc.contains("newton")) {
        const json& s = doc["newton"];
        r.check_keys(s, "newton", {"tol", "max_iter", "damping"});
        r.number(s, "tol", "newton.tol", solver.newton.tol);
        r.number(s, "max_iter", "newton.max_iter", solver.newton.max_iter);
        r.number(s, "damping", "newton.damping", solver.newton.damping);
    }
    QuadratureConfig quad;
    if (doc.contains("quadrature")) {
        const json& s = doc["quadrature"];
        r.check_keys(s, "quadrature", {"rel_tol", "abs_tol", "max_subdivisions"});
        r.number(s, "rel_tol", "quadrature.rel_tol", quad.rel_tol);
        r.number(s, "abs_tol", "quadrature.abs_tol", quad.abs_tol);
        r.number(s, "max_subdivisions", "quadrature.max_subdivisions", quad.max_subdivisions);
    }
    PicardConfig picard;
    if (doc.contains("picard")) {
        const json& s = doc["picard"];
        r.check_keys(s, "picard", {"tol", "max_iter", "min_nodes", "max_panel"});
        r.number(s, "tol", "picard.tol", picard.tol);
        r.number(s, "max_iter", "picard.max_iter", picard.max_iter);
        r.number(s, "min_nodes", "picard.min_nodes", picard.min_nodes);
        r.number(s, "max_panel", "picard.max_panel", picard.max_panel);
    }
    picard.quadrature = quad;
    CheckConfig check;
    check.seed = solver.seed;
    if (doc.contains("check")) {
        const json& s = doc["check"];
        r.check_keys(s, "check", {"box", "box_radius", "samples_per_dim", "lipschitz_pairs",
                                  "lipschitz_radius", "seed"});
        if (s.contains("box")) {
            const json& b = s["box"];
            if (!b.is_object() || !b.contains("lo") || !b.contains("hi")) {
                r.error("check.box", "expected {\"lo\": [...], \"hi\": [...]}");
            } else {
                auto lo = r.vector(b["lo"], "check.box.lo", false);
                auto hi = r.vector(b["hi"], "check.box.hi", false);
                if (lo && hi && n >= 1) {
                    if ((lo->size() != 1 && lo->size() != n) || (hi->size() != 1 && hi->size() != n))
                        r.error("check.box", "bounds must have 1 or n entries");
                    else if (!(broadcast(*lo, n).array() <= broadcast(*hi, n).array()).all())
                        r.error("check.box", "requires lo <= hi");
                    else
                        check.box = Box{broadcast(*lo, n), broadcast(*hi, n)};
                }
            }
        }
        r.number(s, "box_radius", "check.box_radius", check.box_radius);
        r.number(s, "samples_per_dim", "check.samples_per_dim", check.samples_per_dim);
        r.number(s, "lipschitz_pairs", "check.lipschitz_pairs", check.lipschitz_pairs);
        r.number(s, "lipschitz_radius", "check.lipschitz_radius", check.lipschitz_radius);
        r.number(s, "seed", "check.seed", check.seed);
    }
    OutputConfig output;
    if (doc.contains("output")) {
        const json& s = doc["output"];
        r.check_keys(s, "output", {"csv", "report"});
        if (s.contains("csv") && s["csv"].is_string()) output.csv = s["csv"].get<std::string>();
        if (s.contains("report") && s["report"].is_string()) output.report = s["report"].get<std::string>();
    }

    auto validate = [&](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            r.error(field, e.what());
        }
    };
    validate("solver", [&] { solver.validate(); });
    validate("quadrature", [&] { quad.validate(); });
    validate("picard", [&] { picard.validate(); });
    if (check.samples_per_dim < 1) r.error("check.samples_per_dim", "must be >= 1");
    if (check.lipschitz_pairs < 2) r.error("check.lipschitz_pairs", "must be >= 2");
    if (!(check.box_radius > 0)) r.error("check.box_radius", "must be positive");
    if (!(check.lipschitz_radius > 0)) r.error("check.lipschitz_radius", "must be positive");

    if (!errors.empty()) throw ConfigError(errors);

    std::string resolved_name = name;
    if (doc.contains("name") && doc["name"].is_string()) resolved_name = doc["name"].get<std::string>();
    return ProblemConfig{resolved_name, std::move(*ts), std::move(*ds), std::move(*omega), t0,
                         std::move(*q0), shifted, solver, quad, picard, check, output};
}

ProblemConfig load_problem(const std::string& path) {
    std::string stem = path;
    if (auto p = stem.find_last_of('/'); p != std::string::npos) stem = stem.substr(p + 1);
    if (auto p = stem.rfind(".json"); p != std::string::npos && p + 5 == stem.size()) stem.resize(p);
    return parse_problem(read_json_file(path), stem);
}

namespace {

json vec_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v[i]))
            a.push_back(v[i]);
        else
            a.push_back(format_double(v[i]));
    }
    return a;
}

json omega_json(const DomainOmega& o) {
    switch (o.kind()) {
        case DomainOmega::Kind::whole_space: return {{"type", "whole"}};
        case DomainOmega::Kind::open_box: return {{"type", "box"}, {"lo", vec_json(o.lo())}, {"hi", vec_json(o.hi())}};
        case DomainOmega::Kind::open_ball:
            return {{"type", "ball"}, {"center", vec_json(o.center())}, {"radius", o.radius()}};
    }
    return nullptr;
}

json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

}  // namespace

Box ProblemConfig::check_box() const {
    if (check.box) return *check.box;
    const double n = static_cast<double>(q0.size());
    double r = check.box_radius;
    const double dist = omega.dist_to_complement(q0);
    if (std::isfinite(dist)) r = std::min(r, 0.9 * dist / std::sqrt(n));
    return Box{(q0.array() - r).matrix(), (q0.array() + r).matrix()};
}

json ProblemConfig::resolved() const {
    json dyn = {{"provenance", ds.provenance()}, {"n", ds.dim()}};
    if (!ds.breakpoints.empty()) dyn["breakpoints"] = ds.breakpoints;
    json out = {
        {"name", name},
        {"timescale", timescale_to_json(ts)},
        {"dynamics", dyn},
        {"omega", omega_json(omega)},
        {"t0", t0},
        {"q0", vec_json(q0)},
        {"shifted", shifted},
        {"solver",
         {{"rel_tol", solver.rel_tol},
          {"abs_tol", solver.abs_tol},
          {"max_span", finite_or_string(solver.max_span)},
          {"max_steps", solver.max_steps},
          {"norm_cap", solver.escape.norm_cap},
          {"boundary_eps", solver.escape.boundary_eps},
          {"lipschitz_check", solver.lipschitz_check},
          {"lipschitz_pairs", solver.lipschitz_pairs},
          {"seed", solver.seed}}},
        {"newton",
         {{"tol", solver.newton.tol}, {"max_iter", solver.newton.max_iter}, {"damping", solver.newton.damping}}},
        {"quadrature",
         {{"rel_tol", quadrature.rel_tol},
          {"abs_tol", quadrature.abs_tol},
          {"max_subdivisions", quadrature.max_subdivisions}}},
        {"picard",
         {{"tol", picard.tol},
          {"max_iter", picard.max_iter},
          {"min_nodes", picard.min_nodes},
          {"max_panel", picard.max_panel}}},
        {"check",
         {{"box_radius", check.box_radius},
          {"samples_per_dim", check.samples_per_dim},
          {"lipschitz_pairs", check.lipschitz_pairs},
          {"lipschitz_radius", check.lipschitz_radius},
          {"seed", check.seed}}},
    };
    const Box b = check_box();
    out["check"]["box"] = {{"lo", vec_json(b.lo)}, {"hi", vec_json(b.hi)}};
    if (!ts.normalization_notes().empty()) out["timescale_notes"] = ts.normalization_notes();
    return out;
}

}  // namespace tscale
