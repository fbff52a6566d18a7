#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tscale/domain.hpp"
#include "tscale/expression.hpp"
#include "tscale/timescale.hpp"
#include "tscale/types.hpp"

namespace tscale {

/// f(x, t) produced a NaN or a result of the wrong size.
class EvaluationFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using RhsFunction = std::function<Vector(const Vector&, double)>;
using JacobianFunction = std::function<Matrix(const Vector&, double)>;

/// Dynamics f : Omega x (T \ {max T}) -> R^n.
class DynamicsSpec {
public:
    DynamicsSpec(int n, RhsFunction f, std::optional<JacobianFunction> jacobian = std::nullopt,
                 std::string provenance = "custom");

    /// Vector dynamics from n comma-separated components over x1..xn, t.
    static DynamicsSpec from_expression(const std::string& text, int n);

    /// Catalog entry: "constant" {c}, "linear" {h}, "sqrt_abs" {scale = 2},
    /// "square", "neg". Scalar parameters act componentwise; "c" may also be
    /// given per component.
    static DynamicsSpec builtin(const std::string& name,
                                const std::map<std::string, std::vector<double>>& params, int n);

    int dim() const { return n_; }
    const std::string& provenance() const { return provenance_; }
    bool has_analytic_jacobian() const { return jacobian_.has_value(); }

    Vector evaluate(const Vector& x, double t) const;

    /// Analytic Jacobian when available, otherwise central differences with
    /// step 1e-6 (1 + |x|).
    Matrix jacobian(const Vector& x, double t) const;

    /// Times where f may jump in t; dense integration and quadrature treat
    /// them as panel boundaries.
    std::vector<double> breakpoints;

private:
    int n_;
    RhsFunction f_;
    std::optional<JacobianFunction> jacobian_;
    std::string provenance_;
};

enum class StepVariant { plus, minus };

/// G+(t)(x) = x + mu f(x,t) or G-(t)(x) = x - mu f(x,t).
Vector scattered_map(const DynamicsSpec& ds, double t, double mu_t, const Vector& x,
                     StepVariant variant);

struct NewtonConfig {
    double tol = 1e-12;
    int max_iter = 50;
    double damping = 1.0;

    void validate() const;
};

struct InversionResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;
    bool finite_difference_jacobian = false;
    /// The step map's Jacobian is singular at the returned preimage, so the
    /// preimage need not be unique.
    bool singular_at_solution = false;
};

class InversionError : public std::runtime_error {
public:
    enum class Kind { singular_jacobian, no_convergence, outside_omega };

    InversionError(Kind kind, const std::string& what, Vector last_iterate, double residual)
        : std::runtime_error(what), kind_(kind), last_(std::move(last_iterate)), residual_(residual) {}

    Kind kind() const { return kind_; }
    const Vector& last_iterate() const { return last_; }
    double residual() const { return residual_; }

private:
    Kind kind_;
    Vector last_;
    double residual_;
};

const char* to_string(InversionError::Kind k);

/// Solves G(t)(x) = y for x by damped Newton (step halving on residual
/// increase), starting from x_init. The preimage must lie in omega.
InversionResult invert_scattered_map(const DynamicsSpec& ds, const DomainOmega& omega, double t,
                                     double mu_t, const Vector& y, StepVariant variant,
                                     const NewtonConfig& cfg, const Vector& x_init);

// ---------------------------------------------------------------------------
// Sampling-based hypothesis checks. A pass is evidence, never a proof.

struct StabilityViolation {
    double t;
    Vector x;
    Vector image;
};

struct StabilityReport {
    std::string hypothesis;
    std::size_t scattered_points = 0;
    std::size_t samples_per_point = 0;
    std::size_t tested = 0;
    std::vector<StabilityViolation> violations;

    bool passed() const { return violations.empty(); }
};

/// Checks G+(r)(x) in Omega for every right-scattered r and every point of a
/// uniform lattice with samples_per_dim points per axis over `box`.
StabilityReport check_forward_stability(const DynamicsSpec& ds, const DomainOmega& omega,
                                        const TimeScale& ts, const Box& box, int samples_per_dim);

/// Same with G-.
StabilityReport check_backward_stability(const DynamicsSpec& ds, const DomainOmega& omega,
                                         const TimeScale& ts, const Box& box, int samples_per_dim);

struct LipschitzEstimate {
    double L_hat = 0.0;
    bool diverging = false;
    std::vector<double> separations;     // one per scale, decreasing
    std::vector<double> max_ratio;       // max quotient seen at each scale
    std::uint64_t seed = 0;
    std::size_t pairs_evaluated = 0;
};

/// Max of |f(x1,t) - f(x2,t)| / |x1 - x2| over random pairs in the closed ball
/// B(center, radius) at separations radius, radius/10, ..., radius/1e8, and
/// random t in [t1, t2)_T. Half of the pairs at each scale are drawn close to
/// the center. `diverging` is set when the per-scale maximum keeps growing as
/// the separation shrinks.
LipschitzEstimate estimate_lipschitz(const DynamicsSpec& ds, const DomainOmega& omega,
                                     const TimeScale& ts, const Vector& center, double radius,
                                     double t1, double t2, int n_pairs, std::uint64_t seed);

struct BoundReport {
    double max_norm = 0.0;
    double argmax_t = 0.0;
    Vector argmax_x;
    std::size_t samples = 0;
};

/// Sampled sup of |f| over box x (sampled points of T \ {max T}).
BoundReport check_local_bound(const DynamicsSpec& ds, const TimeScale& ts, const Box& box,
                              int samples_per_dim, int t_samples_per_run = 16);

struct RegressivityProbe {
    double t;
    Vector x;
    double det;
};

struct RegressivityReport {
    std::string hypothesis;
    std::size_t tested = 0;
    std::vector<RegressivityProbe> singular;  // det(I +/- mu J) numerically zero
    std::vector<double> sign_changes;         // r where det changes sign over the box

    bool passed() const { return singular.empty() && sign_changes.empty(); }
};

/// Probes invertibility of G+ (variant plus, backward regressivity) or G-
/// (variant minus, forward regressivity) at every right-scattered point.
RegressivityReport check_regressivity(const DynamicsSpec& ds, const TimeScale& ts, const Box& box,
                                      int samples_per_dim, StepVariant variant);

/// Lattice points of a box, samples_per_dim per axis (midpoint when 1).
std::vector<Vector> box_lattice(const Box& box, int samples_per_dim);

}  // namespace tscale
