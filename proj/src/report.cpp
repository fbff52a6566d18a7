#include "tscale/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tscale/format.hpp"

namespace tscale {

using nlohmann::json;

json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

json json_vector(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v[i]));
    return a;
}

std::string trajectory_csv(const TimeScale& ts, const Trajectory& traj) {
    std::ostringstream os;
    os << "t";
    for (std::size_t i = 1; i <= traj.dim(); ++i) os << ",q" << i;
    os << ",left_class,right_class\n";
    for (const Node& n : traj.nodes()) {
        const PointClass pc = ts.classify(n.t);
        os << format_double(n.t);
        for (Eigen::Index i = 0; i < n.q.size(); ++i) os << ',' << format_double(n.q[i]);
        os << ',' << to_string(pc.left) << ',' << to_string(pc.right) << '\n';
    }
    return os.str();
}

int exit_code(const Trajectory& traj) {
    switch (traj.interval.kind()) {
        case IntervalKind::global: return 0;
        case IntervalKind::existence_failure: return 3;
        default: return 2;
    }
}

namespace {

json class_json(const std::optional<PointClass>& pc) {
    if (!pc) return nullptr;
    return {{"left", to_string(pc->left)}, {"right", to_string(pc->right)}};
}

json end_json(const IntervalEnd& e) {
    json j = {{"kind", to_string(e.kind)},
              {"t", json_number(e.t)},
              {"terminal_class", class_json(e.terminal_class)}};
    if (e.kind == EndKind::escape) {
        j["bracket"] = {json_number(e.bracket_lo), json_number(e.bracket_hi)};
        if (e.evidence)
            j["escape_evidence"] = {{"t", json_number(e.evidence->t)},
                                    {"q", json_vector(e.evidence->q)},
                                    {"norm", json_number(e.evidence->norm)},
                                    {"boundary_distance", json_number(e.evidence->boundary_distance)},
                                    {"reason", e.evidence->reason}};
    }
    return j;
}

json failure_json(const Failure& f) {
    json j = {{"direction", to_string(f.direction)},
              {"kind", to_string(f.kind)},
              {"t", json_number(f.t)},
              {"x", json_vector(f.x)},
              {"detail", f.detail}};
    if (f.image) j["image"] = json_vector(*f.image);
    return j;
}

constexpr std::size_t kListed = 20;

}  // namespace

json interval_json(const MaximalInterval& iv) {
    json j = {{"kind", to_string(iv.kind())},
              {"covers_scale", iv.covers_scale},
              {"lower", end_json(iv.lower)},
              {"upper", end_json(iv.upper)}};
    if (iv.lower.kind == EndKind::escape) j["a"] = json_number(iv.lower.t);
    if (iv.upper.kind == EndKind::escape) j["b"] = json_number(iv.upper.t);
    return j;
}

SolveResiduals compute_residuals(const ProblemConfig& cfg, const Trajectory& traj) {
    SolveResiduals out;
    const CauchyProblem cp = cfg.problem();
    if (traj.interval.upper.t > cp.t0()) {
        try {
            const double b = traj.nodes().back().t;
            if (traj.nodes().back().q.allFinite())
                out.roundtrip = roundtrip_residual(cp, cfg.solver, b);
            else
                out.roundtrip_note = "skipped: state is not finite at the forward end";
        } catch (const std::exception& e) {
            out.roundtrip_note = std::string("not available: ") + e.what();
        }
    } else {
        out.roundtrip_note = "not applicable: nothing solved forward of t0";
    }
    try {
        const auto res = fundamental_residuals(cfg.ts, traj, cfg.quadrature);
        double worst = 0.0;
        for (std::size_t i = 0; i < res.size(); ++i) {
            const Vector& q = traj.nodes()[i].q;
            if (!q.allFinite() || !std::isfinite(res[i])) continue;
            worst = std::max(worst, res[i] / std::max(1.0, q.norm()));
        }
        out.fundamental_max = worst;
    } catch (const std::exception&) {
    }
    return out;
}

json solve_report(const ProblemConfig& cfg, const Trajectory& traj, const SolveResiduals& res) {
    json failures = json::array();
    for (const Failure& f : traj.failures) failures.push_back(failure_json(f));
    json residuals = json::object();
    residuals["roundtrip"] = res.roundtrip ? json_number(*res.roundtrip) : json(nullptr);
    if (!res.roundtrip_note.empty()) residuals["roundtrip_note"] = res.roundtrip_note;
    residuals["fundamental_check_max_relative"] =
        res.fundamental_max ? json_number(*res.fundamental_max) : json(nullptr);
    json iv = interval_json(traj.interval);
    json out = {{"name", cfg.name},
                {"kind", iv["kind"]},
                {"interval", iv},
                {"t0", json_number(cfg.t0)},
                {"position", to_string(cfg.problem().position())},
                {"shifted", cfg.shifted},
                {"nodes", traj.nodes().size()},
                {"dense_segments", traj.dense_segments().size()},
                {"failures", failures},
                {"residuals", residuals},
                {"warnings", traj.warnings},
                {"exit_code", exit_code(traj)}};
    if (iv.contains("a")) out["a"] = iv["a"];
    if (iv.contains("b")) out["b"] = iv["b"];
    out["terminal_classes"] = {{"lower", iv["lower"]["terminal_class"]}, {"upper", iv["upper"]["terminal_class"]}};
    return out;
}

namespace {

json stability_json(const StabilityReport& rep) {
    json v = json::array();
    for (std::size_t i = 0; i < std::min(rep.violations.size(), kListed); ++i) {
        const auto& s = rep.violations[i];
        v.push_back({{"t", json_number(s.t)}, {"x", json_vector(s.x)}, {"image", json_vector(s.image)}});
    }
    return {{"hypothesis", rep.hypothesis},
            {"passed", rep.passed()},
            {"scattered_points", rep.scattered_points},
            {"samples_per_point", rep.samples_per_point},
            {"tested", rep.tested},
            {"violation_count", rep.violations.size()},
            {"violations", v}};
}

json regressivity_json(const RegressivityReport& rep) {
    json s = json::array();
    for (std::size_t i = 0; i < std::min(rep.singular.size(), kListed); ++i) {
        const auto& p = rep.singular[i];
        s.push_back({{"t", json_number(p.t)}, {"x", json_vector(p.x)}, {"det", json_number(p.det)}});
    }
    return {{"hypothesis", rep.hypothesis},
            {"passed", rep.passed()},
            {"tested", rep.tested},
            {"singular_count", rep.singular.size()},
            {"singular", s},
            {"sign_changes", rep.sign_changes}};
}

}  // namespace

json check_report(const ProblemConfig& cfg) {
    const Box box = cfg.check_box();
    const int spd = cfg.check.samples_per_dim;
    json out = {{"name", cfg.name},
                {"box", {{"lo", json_vector(box.lo)}, {"hi", json_vector(box.hi)}}},
                {"samples_per_dim", spd},
                {"seed", cfg.check.seed},
                {"note", "sampling-based evidence, not proof"}};

    const BoundReport bound = check_local_bound(cfg.ds, cfg.ts, box, spd);
    out["local_bound"] = {{"max_norm", json_number(bound.max_norm)},
                          {"argmax_t", json_number(bound.argmax_t)},
                          {"argmax_x", json_vector(bound.argmax_x)},
                          {"samples", bound.samples},
                          {"passed", std::isfinite(bound.max_norm)}};

    // Lipschitz at right-dense points: probe every interval segment.
    const double radius = std::min(cfg.check.lipschitz_radius,
                                   0.5 * cfg.omega.dist_to_complement(cfg.q0));
    json lips = json::array();
    bool any_dense = false, diverging = false;
    double l_hat = 0.0;
    for (const Segment& s : cfg.ts.segments()) {
        if (s.is_point()) continue;
        any_dense = true;
        const LipschitzEstimate est = estimate_lipschitz(cfg.ds, cfg.omega, cfg.ts, cfg.q0, radius, s.lo,
                                                         s.hi, cfg.check.lipschitz_pairs, cfg.check.seed);
        diverging = diverging || est.diverging;
        l_hat = std::max(l_hat, est.L_hat);
        json per_scale = json::array();
        for (std::size_t i = 0; i < est.separations.size(); ++i)
            per_scale.push_back({{"separation", est.separations[i]}, {"max_ratio", json_number(est.max_ratio[i])}});
        lips.push_back({{"t_window", {s.lo, s.hi}},
                        {"L_hat", json_number(est.L_hat)},
                        {"diverging", est.diverging},
                        {"pairs_evaluated", est.pairs_evaluated},
                        {"per_scale", per_scale}});
    }
    out["lipschitz"] = {{"center", json_vector(cfg.q0)},
                        {"radius", radius},
                        {"vacuous", !any_dense},
                        {"L_hat", json_number(l_hat)},
                        {"diverging", diverging},
                        {"passed", !diverging},
                        {"windows", lips}};

    out["forward_stability"] = stability_json(check_forward_stability(cfg.ds, cfg.omega, cfg.ts, box, spd));
    out["backward_stability"] = stability_json(check_backward_stability(cfg.ds, cfg.omega, cfg.ts, box, spd));
    out["backward_regressivity"] =
        regressivity_json(check_regressivity(cfg.ds, cfg.ts, box, spd, StepVariant::plus));
    out["forward_regressivity"] =
        regressivity_json(check_regressivity(cfg.ds, cfg.ts, box, spd, StepVariant::minus));

    // The hypotheses each problem variant needs.
    const bool fwd = cfg.shifted ? out["forward_regressivity"]["passed"].get<bool>()
                                 : out["forward_stability"]["passed"].get<bool>();
    const bool bwd = cfg.shifted ? out["backward_stability"]["passed"].get<bool>()
                                 : out["backward_regressivity"]["passed"].get<bool>();
    out["summary"] = {{"variant", cfg.shifted ? "shifted" : "non-shifted"},
                      {"forward_step_ok", fwd},
                      {"backward_step_ok", bwd},
                      {"lipschitz_ok", !diverging},
                      {"bounded", std::isfinite(bound.max_norm)}};
    return out;
}

}  // namespace tscale
