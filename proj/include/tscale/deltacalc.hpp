#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "tscale/timescale.hpp"
#include "tscale/trajectory.hpp"
#include "tscale/types.hpp"

namespace tscale {

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_subdivisions = 2000;

    void validate() const;
};

struct IntegralResult {
    Vector value;
    double error_estimate = 0.0;
    int subdivisions = 0;
    long evaluations = 0;
};

struct ScalarIntegral {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Adaptive quadrature did not reach the requested tolerance. Carries the
/// partial value and its error estimate.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, IntegralResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const IntegralResult& partial() const { return partial_; }

private:
    IntegralResult partial_;
};

using VectorFunction = std::function<Vector(double)>;
using ScalarFunction = std::function<double(double)>;

/// mu_Delta([a,b)_T). Computed as Lebesgue length of the dense runs plus the
/// graininess of every scattered step, and checked against b - a.
double delta_measure(const TimeScale& ts, double a, double b);

/// Integral of g over [a,b)_T: adaptive Gauss-Kronrod (7/15) on each dense run
/// plus mu(r) g(r) for every right-scattered r. `breakpoints` split dense runs
/// into initial panels (use them where g has kinks or jumps).
IntegralResult delta_integral(const TimeScale& ts, const VectorFunction& g, double a, double b,
                              const QuadratureConfig& cfg = {},
                              std::span<const double> breakpoints = {});

ScalarIntegral delta_integral(const TimeScale& ts, const ScalarFunction& g, double a, double b,
                              const QuadratureConfig& cfg = {},
                              std::span<const double> breakpoints = {});

/// Lebesgue part only: integral of g over the dense runs of [a,b)_T.
ScalarIntegral dense_integral(const TimeScale& ts, const ScalarFunction& g, double a, double b,
                              const QuadratureConfig& cfg = {});

class DerivativeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct DerivativeResult {
    Vector value;
    double error_estimate = 0.0;
    bool exact = false;  // true at right-scattered points
};

/// q^Delta(t). Exact difference quotient at right-scattered t; at right-dense
/// t a one-sided difference quotient that stays inside the dense run, refined
/// by Richardson extrapolation.
DerivativeResult delta_derivative(const TimeScale& ts, const VectorFunction& q, double t);
DerivativeResult delta_derivative(const TimeScale& ts, const ScalarFunction& q, double t);

/// || q(t) - q(t0) -/+ integral of q^Delta || for a computed trajectory, where
/// q^Delta is rebuilt from the trajectory (scattered quotients and
/// interpolant derivatives).
double fundamental_check(const TimeScale& ts, const Trajectory& q, double t0, double t,
                         const QuadratureConfig& cfg = {});

/// The same residual anchored at the trajectory's t0, evaluated at every node
/// in one cumulative pass. Entry i belongs to q.nodes()[i].
std::vector<double> fundamental_residuals(const TimeScale& ts, const Trajectory& q,
                                          const QuadratureConfig& cfg = {});

}  // namespace tscale
