#pragma once

#include <stdexcept>
#include <vector>

#include "tscale/deltacalc.hpp"
#include "tscale/solver.hpp"

namespace tscale {

struct PicardConfig {
    double tol = 1e-10;
    int max_iter = 200;
    /// Minimum number of grid points on every dense run.
    int min_nodes = 17;
    /// Largest dense panel. Zero selects min(run / 16, 1e-3 * span).
    double max_panel = 0.0;
    QuadratureConfig quadrature;

    void validate() const;
};

/// Values on an ordered grid of points of T. Between consecutive grid points
/// of a dense run the function is linear; at scattered points it is exact.
struct GridFunction {
    std::vector<double> grid;
    std::vector<Vector> values;
    /// dense[i] is true when (grid[i], grid[i+1]) lies inside a dense run.
    std::vector<bool> dense;

    std::size_t size() const { return grid.size(); }
    Vector at(double t) const;
    std::size_t index_of(double t) const;
};

/// Grid covering [a,b]_T: every scattered endpoint, t0, and uniform
/// subdivisions of the dense runs.
GridFunction build_grid(const TimeScale& ts, double a, double b, double t0, const PicardConfig& cfg = {});

/// A grid function sampled from `q` on the grid of `shape`.
GridFunction sample_on(const GridFunction& shape, const std::function<Vector(double)>& q);

class PicardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// F(g)(t) = q0 + integral over [t0,t)_T of f(g(tau), tau) (or f(g(sigma(tau)), tau)
/// when shifted); for t < t0 the integral over [t,t0)_T is subtracted.
/// Throws PicardError when g leaves Omega.
GridFunction picard_operator(const CauchyProblem& cp, const GridFunction& g, const PicardConfig& cfg = {});

/// sup over the grid of |g1 - g2|.
double sup_distance(const GridFunction& g1, const GridFunction& g2);

struct PicardResult {
    GridFunction fixed_point;
    int iterations = 0;              // applications of F
    std::vector<double> gaps;        // |g_{k+1} - g_k| after each application
    std::vector<double> ratios;      // gaps[k] / gaps[k-1]
    bool converged = false;
    bool diverging = false;
};

/// Iterates F from g0 = q0 on [a,b]_T until the sup-norm step is at most tol,
/// max_iter is reached, or the ratios stay >= 1 (divergence).
PicardResult picard_iterate(const CauchyProblem& cp, double a, double b, const PicardConfig& cfg = {});

/// Solution of q^Delta = h(t) q, q(t0) = 1 at t >= t0:
/// prod over scattered r of (1 + mu(r) h(r)) times exp of the dense integral of h.
double delta_exponential(const TimeScale& ts, const ScalarFunction& h, double t0, double t,
                         const QuadratureConfig& cfg = {});

struct GrowthCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    bool equal = false;  // |lhs - rhs| <= 1e-10 rhs
};

/// Forward (t0 = min T): integral over [t0,t)_T of (tau - t0)^k.
/// Backward (t0 = max T): integral over [t,t0)_T of (t0 - sigma(tau))^k.
/// Both are compared with |t - t0|^(k+1) / (k+1).
GrowthCheck verify_growth_lemma(const TimeScale& ts, double t0, int k, double t, Direction direction,
                                const QuadratureConfig& cfg = {});

}  // namespace tscale
