// Command-line front end: solve, check, picard, integrate, diff, calc, suite.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tscale/config.hpp"
#include "tscale/expression.hpp"
#include "tscale/format.hpp"
#include "tscale/picard.hpp"
#include "tscale/report.hpp"
#include "tscale/solver.hpp"
#include "tscale/suite.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tscale;

namespace {

constexpr int kInternalError = 1;

std::string output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("TSCALE_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

fs::path resolve_path(const std::string& configured, const std::string& dir, const std::string& fallback) {
    if (configured.empty()) return fs::path(dir) / fallback;
    fs::path p(configured);
    return p.is_absolute() ? p : fs::path(dir) / p;
}

// Inline JSON (starting with '{') or a path to a JSON file.
json load_fragment(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && arg[first] == '{') return parse_json(arg, "fragment");
    return read_json_file(arg);
}

QuadratureConfig fragment_quadrature(const json& frag) {
    QuadratureConfig q;
    if (frag.contains("quadrature")) {
        const json& s = frag["quadrature"];
        q.rel_tol = s.value("rel_tol", q.rel_tol);
        q.abs_tol = s.value("abs_tol", q.abs_tol);
        q.max_subdivisions = s.value("max_subdivisions", q.max_subdivisions);
    }
    q.validate();
    return q;
}

double fragment_number(const json& frag, const char* key) {
    if (!frag.contains(key) || !frag[key].is_number())
        throw ConfigError({std::string(key) + ": expected a number"});
    return frag[key].get<double>();
}

std::string fragment_string(const json& frag, const char* key) {
    if (!frag.contains(key) || !frag[key].is_string()) throw ConfigError({std::string(key) + ": expected a string"});
    return frag[key].get<std::string>();
}

TimeScale fragment_timescale(const json& frag) {
    if (!frag.contains("timescale")) throw ConfigError({"timescale: required"});
    try {
        return parse_timescale(frag["timescale"]);
    } catch (const std::invalid_argument& e) {
        throw ConfigError({std::string("timescale: ") + e.what()});
    }
}

// ---------------------------------------------------------------------------

struct SolveOutcome {
    std::string path;
    int code = kInternalError;
    std::string summary;
};

SolveOutcome run_solve(const std::string& path, const std::string& dir) {
    SolveOutcome out;
    out.path = path;
    std::string name = fs::path(path).stem().string();
    try {
        const ProblemConfig cfg = load_problem(path);
        name = cfg.name;
        const auto start = std::chrono::steady_clock::now();
        const Trajectory traj = solve(cfg.problem(), cfg.solver);
        const double solve_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const SolveResiduals res = compute_residuals(cfg, traj);
        json report = solve_report(cfg, traj, res);
        report["config"] = cfg.resolved();
        report["timing"] = {{"solve_seconds", solve_s}};
        const fs::path csv = resolve_path(cfg.output.csv, dir, name + ".csv");
        const fs::path rep = resolve_path(cfg.output.report, dir, name + ".report.json");
        write_file(csv, trajectory_csv(cfg.ts, traj));
        write_file(rep, report.dump(2) + "\n");
        out.code = exit_code(traj);
        out.summary = name + ": " + report["kind"].get<std::string>();
        if (report.contains("b")) out.summary += " b=" + report["b"].dump();
        if (report.contains("a")) out.summary += " a=" + report["a"].dump();
        for (const Failure& f : traj.failures)
            out.summary += std::string(" ") + to_string(f.kind) + " at t=" + format_double(f.t);
        for (const auto& w : traj.warnings) out.summary += "\n  warning: " + w;
        out.summary += "\n  wrote " + csv.string() + ", " + rep.string();
    } catch (const ConfigParseError& e) {
        out.code = kInternalError;
        out.summary = e.what();
    } catch (const ConfigError& e) {
        out.code = kInternalError;
        out.summary = path + ": " + e.what();
    } catch (const std::exception& e) {
        out.code = kInternalError;
        out.summary = path + ": internal error: " + e.what();
        try {
            const json stub = {{"name", name}, {"kind", "internal_error"}, {"error", e.what()}, {"exit_code", 1}};
            write_file(fs::path(dir) / (name + ".report.json"), stub.dump(2) + "\n");
        } catch (...) {
        }
    }
    return out;
}

int cmd_solve(const std::vector<std::string>& configs, const std::string& dir, int jobs) {
    std::vector<SolveOutcome> outcomes(configs.size());
    const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
    for (std::size_t start = 0; start < configs.size(); start += width) {
        std::vector<std::future<SolveOutcome>> batch;
        for (std::size_t i = start; i < std::min(configs.size(), start + width); ++i)
            batch.push_back(std::async(std::launch::async, run_solve, configs[i], dir));
        for (std::size_t i = 0; i < batch.size(); ++i) outcomes[start + i] = batch[i].get();
    }
    int code = 0;
    for (const auto& o : outcomes) {
        std::cout << o.summary << "\n";
        if (o.code == kInternalError || code == kInternalError)
            code = kInternalError;
        else
            code = std::max(code, o.code);
    }
    return code;
}

int cmd_check(const std::string& path, const std::string& out_file) {
    const ProblemConfig cfg = load_problem(path);
    json report = check_report(cfg);
    report["config"] = cfg.resolved();
    const std::string text = report.dump(2) + "\n";
    if (out_file.empty())
        std::cout << text;
    else
        write_file(out_file, text);
    return 0;
}

int cmd_picard(const std::string& path, const std::vector<double>& interval, double tol, int max_iter) {
    ProblemConfig cfg = load_problem(path);
    if (tol > 0) cfg.picard.tol = tol;
    if (max_iter > 0) cfg.picard.max_iter = max_iter;
    const double a = interval.at(0), b = interval.at(1);
    const CauchyProblem cp = cfg.problem();
    json out = {{"name", cfg.name}, {"interval", {a, b}}, {"tol", cfg.picard.tol}, {"max_iter", cfg.picard.max_iter}};
    int code = 0;
    try {
        const PicardResult pr = picard_iterate(cp, a, b, cfg.picard);
        out["iterations"] = pr.iterations;
        out["converged"] = pr.converged;
        out["diverging"] = pr.diverging;
        out["grid_points"] = pr.fixed_point.size();
        json gaps = json::array(), ratios = json::array();
        for (double g : pr.gaps) gaps.push_back(json_number(g));
        for (double q : pr.ratios) ratios.push_back(json_number(q));
        out["gaps"] = gaps;
        out["ratios"] = ratios;
        const GridFunction again = picard_operator(cp, pr.fixed_point, cfg.picard);
        out["fixed_point_residual"] = json_number(sup_distance(again, pr.fixed_point));

        const Trajectory traj = solve(cp, cfg.solver);
        double gap = 0.0;
        bool covered = true;
        for (std::size_t i = 0; i < pr.fixed_point.size(); ++i) {
            try {
                gap = std::max(gap, (pr.fixed_point.values[i] - traj.at(pr.fixed_point.grid[i])).lpNorm<Eigen::Infinity>());
            } catch (const std::out_of_range&) {
                covered = false;
            }
        }
        out["sup_gap_to_solve"] = covered ? json_number(gap) : json(nullptr);
        if (!covered) out["note"] = "solver trajectory does not cover the whole interval";
        code = pr.converged ? 0 : 2;
    } catch (const PicardError& e) {
        out["error"] = e.what();
        code = 2;
    }
    std::cout << out.dump(2) << "\n";
    return code;
}

int cmd_integrate(const std::string& frag_arg) {
    const json frag = load_fragment(frag_arg);
    const TimeScale ts = fragment_timescale(frag);
    const ExpressionAst ast = parse_expression(fragment_string(frag, "integrand"), 0);
    const double a = fragment_number(frag, "a"), b = fragment_number(frag, "b");
    const QuadratureConfig qc = fragment_quadrature(frag);
    const auto n = static_cast<Eigen::Index>(ast.components.size());
    auto g = [&](double t) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = ast.components[static_cast<std::size_t>(i)].evaluate({}, t);
        return v;
    };
    json out;
    try {
        const IntegralResult r = delta_integral(ts, g, a, b, qc);
        out = {{"value", n == 1 ? json_number(r.value[0]) : json_vector(r.value)},
               {"error_estimate", json_number(r.error_estimate)}};
    } catch (const QuadratureError& e) {
        const IntegralResult& r = e.partial();
        out = {{"value", n == 1 ? json_number(r.value[0]) : json_vector(r.value)},
               {"error_estimate", json_number(r.error_estimate)},
               {"error", e.what()}};
        std::cout << out.dump(2) << "\n";
        return 2;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_diff(const std::string& frag_arg) {
    const json frag = load_fragment(frag_arg);
    const TimeScale ts = fragment_timescale(frag);
    const ExpressionAst ast = parse_expression(fragment_string(frag, "function"), 0);
    const double t = fragment_number(frag, "t");
    const auto n = static_cast<Eigen::Index>(ast.components.size());
    auto q = [&](double s) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = ast.components[static_cast<std::size_t>(i)].evaluate({}, s);
        return v;
    };
    const DerivativeResult r = delta_derivative(ts, q, t);
    const json out = {{"value", n == 1 ? json_number(r.value[0]) : json_vector(r.value)},
                      {"error_estimate", json_number(r.error_estimate)},
                      {"exact", r.exact}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_calc(const std::string& op, const std::string& frag_arg, double t) {
    const json frag = load_fragment(frag_arg);
    const TimeScale ts = fragment_timescale(frag);
    double value = 0.0;
    if (op == "sigma")
        value = ts.sigma(t);
    else if (op == "rho")
        value = ts.rho(t);
    else
        value = ts.graininess(t);
    const PointClass pc = ts.classify(t);
    const json out = {{"op", op},
                      {"t", t},
                      {"value", value},
                      {"class", {{"left", to_string(pc.left)}, {"right", to_string(pc.right)}}}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_suite(double norm_cap, std::uint64_t seed, bool verbose) {
    suite::Options opt;
    opt.norm_cap = norm_cap;
    opt.seed = seed;
    bool all = true;
    suite::run_all(opt, [&](const suite::CriterionResult& r) {
        all = all && r.passed;
        std::cout << suite::format_line(r) << "\n";
        for (const auto& d : r.details)
            if (verbose || d.rfind("FAILED", 0) == 0) std::cout << "    " << d << "\n";
        std::cout.flush();
    });
    std::cout << (all ? "all criteria passed" : "some criteria FAILED") << "\n";
    return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calculus and Cauchy problems on time scales"};
    app.require_subcommand(1);
    std::string out_dir_flag;
    app.add_option("--output-dir", out_dir_flag, "Directory for CSV and report files (default: $TSCALE_OUTPUT_DIR or .)");

    std::vector<std::string> solve_cfgs;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* solve_cmd = app.add_subcommand("solve", "Solve one or more problem configs");
    solve_cmd->add_option("configs", solve_cfgs, "Problem config JSON files")->required();
    solve_cmd->add_option("-j,--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

    std::string check_cfg, check_out;
    auto* check_cmd = app.add_subcommand("check", "Run the hypothesis checkers");
    check_cmd->add_option("config", check_cfg)->required();
    check_cmd->add_option("-o,--out", check_out, "Write the report here instead of stdout");

    std::string picard_cfg;
    std::vector<double> interval;
    double picard_tol = 0.0;
    int picard_iter = 0;
    auto* picard_cmd = app.add_subcommand("picard", "Picard iteration on an interval");
    picard_cmd->add_option("config", picard_cfg)->required();
    picard_cmd->add_option("--interval", interval, "a b")->expected(2)->required();
    picard_cmd->add_option("--tol", picard_tol);
    picard_cmd->add_option("--max-iter", picard_iter);

    std::string integrate_frag;
    auto* integrate_cmd = app.add_subcommand("integrate", "Delta-integral of an expression in t");
    integrate_cmd->add_option("fragment", integrate_frag, "JSON file or inline JSON")->required();

    std::string diff_frag;
    auto* diff_cmd = app.add_subcommand("diff", "Delta-derivative of an expression in t");
    diff_cmd->add_option("fragment", diff_frag, "JSON file or inline JSON")->required();

    std::string calc_op, calc_frag;
    double calc_t = 0.0;
    auto* calc_cmd = app.add_subcommand("calc", "Jump operators and graininess");
    calc_cmd->add_option("op", calc_op)->required()->check(CLI::IsMember({"sigma", "rho", "mu"}));
    calc_cmd->add_option("fragment", calc_frag, "JSON file or inline JSON")->required();
    calc_cmd->add_option("--t", calc_t)->required();

    double norm_cap = 1e8;
    std::uint64_t seed = suite::Options{}.seed;
    bool verbose = false;
    auto* suite_cmd = app.add_subcommand("suite", "Run the acceptance suite");
    suite_cmd->add_option("--norm-cap", norm_cap, "Escape norm cap for the blow-up check");
    suite_cmd->add_option("--seed", seed);
    suite_cmd->add_flag("-v,--verbose", verbose);

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string dir = output_dir(out_dir_flag);
        if (*solve_cmd) return cmd_solve(solve_cfgs, dir, jobs);
        if (*check_cmd) return cmd_check(check_cfg, check_out);
        if (*picard_cmd) return cmd_picard(picard_cfg, interval, picard_tol, picard_iter);
        if (*integrate_cmd) return cmd_integrate(integrate_frag);
        if (*diff_cmd) return cmd_diff(diff_frag);
        if (*calc_cmd) return cmd_calc(calc_op, calc_frag, calc_t);
        if (*suite_cmd) return cmd_suite(norm_cap, seed, verbose);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}
