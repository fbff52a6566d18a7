#pragma once

#include <string>

#include <json.hpp>

#include "tscale/config.hpp"
#include "tscale/trajectory.hpp"

namespace tscale {

/// JSON number, or its shortest decimal string when not finite.
nlohmann::json json_number(double v);
nlohmann::json json_vector(const Vector& v);

/// One row per node: t, q1..qn, left_class, right_class.
std::string trajectory_csv(const TimeScale& ts, const Trajectory& traj);

/// 0 global, 2 maximal but not global, 3 existence failure.
int exit_code(const Trajectory& traj);

nlohmann::json interval_json(const MaximalInterval& iv);

struct SolveResiduals {
    std::optional<double> roundtrip;
    std::optional<double> fundamental_max;  // max over nodes of |residual| / max(1, |q|)
    std::string roundtrip_note;
};

/// Residual witnesses for a computed trajectory.
SolveResiduals compute_residuals(const ProblemConfig& cfg, const Trajectory& traj);

/// Report for `solve`: interval kind, endpoints, terminal classes, escape
/// evidence, failures, residuals and warnings.
nlohmann::json solve_report(const ProblemConfig& cfg, const Trajectory& traj, const SolveResiduals& res);

/// Report for `check`: every hypothesis checker over the configured box.
nlohmann::json check_report(const ProblemConfig& cfg);

}  // namespace tscale
