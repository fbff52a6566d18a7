#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscale/deltacalc.hpp"
#include "tscale/picard.hpp"
#include "tscale/solver.hpp"

namespace tscale {

/// Malformed JSON, with 1-based line and column.
class ConfigParseError : public std::runtime_error {
public:
    ConfigParseError(const std::string& source, int line, int column, const std::string& detail);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_, column_;
};

/// Well-formed JSON that does not describe a valid problem. Each entry names
/// the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct CheckConfig {
    /// Sampling box; defaults to q0 +/- box_radius, clipped into omega.
    std::optional<Box> box;
    double box_radius = 0.5;
    int samples_per_dim = 9;
    int lipschitz_pairs = 256;
    double lipschitz_radius = 0.1;
    std::uint64_t seed = 20240917;
};

struct OutputConfig {
    std::string csv;     // empty: <output_dir>/<name>.csv
    std::string report;  // empty: <output_dir>/<name>.report.json
};

struct ProblemConfig {
    std::string name;
    TimeScale ts;
    DynamicsSpec ds;
    DomainOmega omega;
    double t0;
    Vector q0;
    bool shifted = false;
    SolverConfig solver;
    QuadratureConfig quadrature;
    PicardConfig picard;
    CheckConfig check;
    OutputConfig output;

    CauchyProblem problem() const { return CauchyProblem(ts, ds, omega, t0, q0, shifted); }
    /// The configuration with every default filled in.
    nlohmann::json resolved() const;
    /// The sampling box for hypothesis checks (explicit or derived from q0).
    Box check_box() const;
};

/// Parses JSON text; `source` names the input in error messages.
nlohmann::json parse_json(const std::string& text, const std::string& source);
nlohmann::json read_json_file(const std::string& path);

/// ["interval", lo, hi], ["point", t] and ["quantum", lambda, n, include_zero] entries.
TimeScale parse_timescale(const nlohmann::json& literal);
nlohmann::json timescale_to_json(const TimeScale& ts);

ProblemConfig parse_problem(const nlohmann::json& doc, const std::string& name);
ProblemConfig load_problem(const std::string& path);

}  // namespace tscale
