#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

#include "tscale/domain.hpp"
#include "tscale/dynamics.hpp"
#include "tscale/timescale.hpp"
#include "tscale/trajectory.hpp"

namespace tscale {

/// Where t0 sits in T. Decides which directions are solved.
enum class Position { minimum, maximum, interior };

const char* to_string(Position p);

/// (Delta-CP) q^Delta = f(q, t) or, when shifted, (Delta-CP sigma)
/// q^Delta = f(q^sigma, t), with q(t0) = q0.
class CauchyProblem {
public:
    CauchyProblem(TimeScale ts, DynamicsSpec ds, DomainOmega omega, double t0, Vector q0,
                  bool shifted);

    const TimeScale& ts() const { return ts_; }
    const DynamicsSpec& ds() const { return ds_; }
    const DomainOmega& omega() const { return omega_; }
    double t0() const { return t0_; }
    const Vector& q0() const { return q0_; }
    bool shifted() const { return shifted_; }
    Position position() const { return position_; }

    /// Same problem anchored at (t, q).
    CauchyProblem reanchored(double t, Vector q) const;

private:
    TimeScale ts_;
    DynamicsSpec ds_;
    DomainOmega omega_;
    double t0_;
    Vector q0_;
    bool shifted_;
    Position position_;
};

/// The compact K = {x : |x| <= norm_cap, dist(x, complement of Omega) >= boundary_eps}.
struct EscapeConfig {
    double norm_cap = 1e8;
    double boundary_eps = 1e-8;
};

struct SolverConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    NewtonConfig newton;
    EscapeConfig escape;
    /// Largest step the dense-run integrator may take.
    double max_span = std::numeric_limits<double>::infinity();
    long max_steps = 2'000'000;
    /// Warn when f looks non-Lipschitz near (t0, q0) on a dense run.
    bool lipschitz_check = true;
    int lipschitz_pairs = 64;
    std::uint64_t seed = 20240917;

    void validate() const;
};

/// A scattered step could not be taken: the image left Omega or the step map
/// could not be inverted. Carries the trajectory computed so far.
class ExistenceFailure : public std::runtime_error {
public:
    ExistenceFailure(Failure failure, Trajectory partial);

    const Failure& failure() const { return failure_; }
    const Trajectory& partial() const { return partial_; }

private:
    Failure failure_;
    Trajectory partial_;
};

/// Solves from t0 up to max T (or `until`). Throws ExistenceFailure.
Trajectory solve_forward(const CauchyProblem& cp, const SolverConfig& cfg = {},
                         std::optional<double> until = std::nullopt);

/// Solves from t0 down to min T (or `until`). Throws ExistenceFailure.
Trajectory solve_backward(const CauchyProblem& cp, const SolverConfig& cfg = {},
                          std::optional<double> until = std::nullopt);

/// Both directions as required by the position of t0, merged at t0. Existence
/// failures are caught per direction and recorded in `failures`.
Trajectory solve(const CauchyProblem& cp, const SolverConfig& cfg = {});

/// Solves forward to b, then backward from (b, q(b)) to t0 and returns
/// |q_back(t0) - q0|.
double roundtrip_residual(const CauchyProblem& cp, const SolverConfig& cfg = {},
                          std::optional<double> b = std::nullopt);

}  // namespace tscale
