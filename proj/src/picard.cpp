#include "tscale/picard.hpp"

#include <algorithm>
#include <cmath>

#include "tscale/format.hpp"
#include "tscale/summation.hpp"

namespace tscale {

void PicardConfig::validate() const {
    if (!(tol > 0)) throw std::invalid_argument("picard tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("picard max_iter must be >= 1");
    if (min_nodes < 2) throw std::invalid_argument("picard min_nodes must be >= 2");
    if (!(max_panel >= 0)) throw std::invalid_argument("picard max_panel must be >= 0");
    quadrature.validate();
}

std::size_t GridFunction::index_of(double t) const {
    if (grid.empty() || t < grid.front() || t > grid.back())
        throw std::out_of_range("t=" + format_double(t) + " is outside the grid");
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    return static_cast<std::size_t>(it - grid.begin()) - 1;
}

Vector GridFunction::at(double t) const {
    const std::size_t i = index_of(t);
    if (grid[i] == t) return values[i];
    if (!dense[i])
        throw std::out_of_range("t=" + format_double(t) + " falls in a scattered gap of the grid");
    const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
    return (1.0 - w) * values[i] + w * values[i + 1];
}

GridFunction build_grid(const TimeScale& ts, double a, double b, double t0, const PicardConfig& cfg) {
    cfg.validate();
    if (!ts.contains(a) || !ts.contains(b) || !ts.contains(t0))
        throw std::invalid_argument("grid endpoints and t0 must be points of T");
    if (!(a <= t0 && t0 <= b)) throw std::invalid_argument("grid requires a <= t0 <= b");

    GridFunction g;
    if (a == b) {
        g.grid = {a};
        g.dense = {false};
        return g;
    }
    const double span = b - a;
    auto subdivide = [&](double lo, double hi, double run) {
        double panel = cfg.max_panel > 0 ? cfg.max_panel : std::min(run / 16.0, 1e-3 * span);
        panel = std::min(panel, run / static_cast<double>(cfg.min_nodes - 1));
        const auto m = static_cast<long>(std::ceil((hi - lo) / panel * (1.0 - 1e-12)));
        for (long i = 0; i < std::max(m, 1L); ++i) {
            g.grid.push_back(i == 0 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m));
            g.dense.push_back(true);
        }
    };
    for (const Atom& atom : ts.decompose(a, b)) {
        if (!atom.is_dense()) {
            g.grid.push_back(atom.lo);
            g.dense.push_back(false);
            continue;
        }
        if (t0 > atom.lo && t0 < atom.hi) {
            subdivide(atom.lo, t0, atom.length());
            subdivide(t0, atom.hi, atom.length());
        } else {
            subdivide(atom.lo, atom.hi, atom.length());
        }
    }
    g.grid.push_back(b);
    g.dense.push_back(false);
    return g;
}

GridFunction sample_on(const GridFunction& shape, const std::function<Vector(double)>& q) {
    GridFunction g = shape;
    g.values.clear();
    for (double t : g.grid) g.values.push_back(q(t));
    return g;
}

GridFunction picard_operator(const CauchyProblem& cp, const GridFunction& g, const PicardConfig& cfg) {
    const TimeScale& ts = cp.ts();
    if (g.values.size() != g.grid.size()) throw std::invalid_argument("grid function has no values");
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!cp.omega().contains(g.values[i]))
            throw PicardError("iterate leaves omega at t=" + format_double(g.grid[i]) +
                              "; the operator does not map this grid into omega");
    const std::size_t i0 = g.index_of(cp.t0());
    if (g.grid[i0] != cp.t0()) throw std::invalid_argument("grid does not contain t0");

    const auto dim = cp.ds().dim();
    std::vector<Vector> panel(g.size() - 1);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double lo = g.grid[i], hi = g.grid[i + 1];
        if (!g.dense[i]) {
            // single scattered term mu(lo) f(., lo)
            const double mu = hi - lo;
            const Vector& x = cp.shifted() ? g.values[i + 1] : g.values[i];
            panel[i] = mu * cp.ds().evaluate(x, lo);
            continue;
        }
        const Vector &vlo = g.values[i], &vhi = g.values[i + 1];
        auto integrand = [&](double tau) {
            const double w = (tau - lo) / (hi - lo);
            return cp.ds().evaluate((1.0 - w) * vlo + w * vhi, tau);
        };
        try {
            panel[i] = delta_integral(ts, integrand, lo, hi, cfg.quadrature).value;
        } catch (const QuadratureError& e) {
            panel[i] = e.partial().value;
        }
    }

    GridFunction out = g;
    out.values[i0] = cp.q0();
    CompensatedSum up(dim);
    for (std::size_t i = i0; i + 1 < g.size(); ++i) {
        up.add(panel[i]);
        out.values[i + 1] = cp.q0() + up.value();
    }
    CompensatedSum down(dim);
    for (std::size_t i = i0; i > 0; --i) {
        down.add(panel[i - 1]);
        out.values[i - 1] = cp.q0() - down.value();
    }
    return out;
}

double sup_distance(const GridFunction& g1, const GridFunction& g2) {
    if (g1.grid != g2.grid) throw std::invalid_argument("grid functions live on different grids");
    double d = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i)
        d = std::max(d, (g1.values[i] - g2.values[i]).lpNorm<Eigen::Infinity>());
    return d;
}

PicardResult picard_iterate(const CauchyProblem& cp, double a, double b, const PicardConfig& cfg) {
    cfg.validate();
    GridFunction g = build_grid(cp.ts(), a, b, cp.t0(), cfg);
    g.values.assign(g.size(), cp.q0());

    PicardResult res;
    for (int k = 0; k < cfg.max_iter; ++k) {
        GridFunction next = picard_operator(cp, g, cfg);
        ++res.iterations;
        const double gap = sup_distance(next, g);
        if (!res.gaps.empty() && res.gaps.back() > 0) res.ratios.push_back(gap / res.gaps.back());
        res.gaps.push_back(gap);
        g = std::move(next);
        if (gap <= cfg.tol) {
            res.converged = true;
            break;
        }
        if (!std::isfinite(gap)) {
            res.diverging = true;
            break;
        }
        constexpr std::size_t window = 5;
        if (res.ratios.size() >= window &&
            std::all_of(res.ratios.end() - window, res.ratios.end(), [](double r) { return r >= 1.0; })) {
            res.diverging = true;
            break;
        }
    }
    res.fixed_point = std::move(g);
    return res;
}

double delta_exponential(const TimeScale& ts, const ScalarFunction& h, double t0, double t,
                         const QuadratureConfig& cfg) {
    if (!ts.contains(t0) || !ts.contains(t)) throw std::invalid_argument("t0 and t must be points of T");
    if (t < t0) throw std::invalid_argument("delta_exponential requires t >= t0");
    if (t == t0) return 1.0;
    double product = 1.0;
    for (const Atom& atom : ts.decompose(t0, t)) {
        if (atom.is_dense()) continue;
        const double factor = 1.0 + atom.length() * h(atom.lo);
        if (factor == 0.0)
            throw std::domain_error("1 + mu h vanishes at t=" + format_double(atom.lo) +
                                    " (not regressive)");
        product *= factor;
    }
    return product * std::exp(dense_integral(ts, h, t0, t, cfg).value);
}

GrowthCheck verify_growth_lemma(const TimeScale& ts, double t0, int k, double t, Direction direction,
                                const QuadratureConfig& cfg) {
    if (k < 0) throw std::invalid_argument("growth lemma requires k >= 0");
    if (!ts.contains(t)) throw std::invalid_argument("t must be a point of T");
    GrowthCheck out;
    ScalarIntegral lhs;
    if (direction == Direction::forward) {
        if (t0 != ts.min()) throw std::invalid_argument("forward growth lemma requires t0 = min T");
        lhs = delta_integral(
            ts, [&](double tau) { return std::pow(tau - t0, k); }, t0, t, cfg);
    } else {
        if (t0 != ts.max()) throw std::invalid_argument("backward growth lemma requires t0 = max T");
        lhs = delta_integral(
            ts, [&](double tau) { return std::pow(t0 - ts.sigma(tau), k); }, t, t0, cfg);
    }
    out.lhs = lhs.value;
    out.rhs = std::pow(std::abs(t - t0), k + 1) / (k + 1);
    const double slack = 1e-10 * std::max(1.0, std::abs(out.rhs));
    out.holds = out.lhs <= out.rhs + std::max(slack, lhs.error_estimate);
    out.equal = out.lhs == out.rhs || std::abs(out.lhs - out.rhs) <= 1e-10 * std::abs(out.rhs);
    return out;
}

}  // namespace tscale
