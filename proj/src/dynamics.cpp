#include "tscale/dynamics.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tscale/format.hpp"

namespace tscale {

DynamicsSpec::DynamicsSpec(int n, RhsFunction f, std::optional<JacobianFunction> jacobian,
                           std::string provenance)
    : n_(n), f_(std::move(f)), jacobian_(std::move(jacobian)), provenance_(std::move(provenance)) {
    if (n_ < 1) throw std::invalid_argument("dynamics dimension must be >= 1");
    if (!f_) throw std::invalid_argument("dynamics function is empty");
}

DynamicsSpec DynamicsSpec::from_expression(const std::string& text, int n) {
    ExpressionAst ast = parse_dynamics(text, n);
    auto f = [ast](const Vector& x, double t) {
        Vector out(static_cast<Eigen::Index>(ast.components.size()));
        std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
        for (std::size_t i = 0; i < ast.components.size(); ++i)
            out[static_cast<Eigen::Index>(i)] = ast.components[i].evaluate(xs, t);
        return out;
    };
    return DynamicsSpec(n, f, std::nullopt, "expr: " + text);
}

namespace {

double scalar_param(const std::map<std::string, std::vector<double>>& params, const std::string& key,
                    std::optional<double> fallback) {
    auto it = params.find(key);
    if (it == params.end()) {
        if (fallback) return *fallback;
        throw std::invalid_argument("builtin dynamics: missing parameter '" + key + "'");
    }
    if (it->second.size() != 1)
        throw std::invalid_argument("builtin dynamics: parameter '" + key + "' must be a scalar");
    return it->second.front();
}

}  // namespace

DynamicsSpec DynamicsSpec::builtin(const std::string& name,
                                   const std::map<std::string, std::vector<double>>& params, int n) {
    const Eigen::Index dim = n;
    if (name == "constant") {
        Vector c(dim);
        auto it = params.find("c");
        if (it == params.end()) throw std::invalid_argument("builtin dynamics: missing parameter 'c'");
        if (it->second.size() == 1)
            c.setConstant(it->second.front());
        else if (static_cast<Eigen::Index>(it->second.size()) == dim)
            c = Eigen::Map<const Vector>(it->second.data(), dim);
        else
            throw std::invalid_argument("builtin dynamics: 'c' must have 1 or n entries");
        return DynamicsSpec(
            n, [c](const Vector&, double) { return c; },
            [dim](const Vector&, double) { return Matrix(Matrix::Zero(dim, dim)); },
            "constant(c=" + format_double(c[0]) + (dim > 1 ? ",...)" : ")"));
    }
    if (name == "linear") {
        const double h = scalar_param(params, "h", std::nullopt);
        return DynamicsSpec(
            n, [h](const Vector& x, double) { return Vector(h * x); },
            [h, dim](const Vector&, double) { return Matrix(h * Matrix::Identity(dim, dim)); },
            "linear(h=" + format_double(h) + ")");
    }
    if (name == "sqrt_abs") {
        const double s = scalar_param(params, "scale", 2.0);
        // derivative is unbounded at 0; no analytic Jacobian
        return DynamicsSpec(
            n, [s](const Vector& x, double) { return Vector(s * x.cwiseAbs().cwiseSqrt()); },
            std::nullopt, "sqrt_abs(scale=" + format_double(s) + ")");
    }
    if (name == "square") {
        return DynamicsSpec(
            n, [](const Vector& x, double) { return Vector(x.cwiseProduct(x)); },
            [](const Vector& x, double) { return Matrix((2.0 * x).asDiagonal()); }, "square");
    }
    if (name == "neg") {
        return DynamicsSpec(
            n, [](const Vector& x, double) { return Vector(-x); },
            [dim](const Vector&, double) { return Matrix(-Matrix::Identity(dim, dim)); }, "neg");
    }
    throw std::invalid_argument("unknown builtin dynamics '" + name + "'");
}

Vector DynamicsSpec::evaluate(const Vector& x, double t) const {
    Vector out = f_(x, t);
    if (out.size() != n_)
        throw EvaluationFault("dynamics returned " + std::to_string(out.size()) +
                              " components, expected " + std::to_string(n_));
    if (out.hasNaN())
        throw EvaluationFault("dynamics evaluated to NaN at t=" + format_double(t));
    return out;
}

Matrix DynamicsSpec::jacobian(const Vector& x, double t) const {
    if (jacobian_) return (*jacobian_)(x, t);
    const double step = 1e-6 * (1.0 + x.norm());
    Matrix J(n_, n_);
    Vector xp = x, xm = x;
    for (int j = 0; j < n_; ++j) {
        xp[j] = x[j] + step;
        xm[j] = x[j] - step;
        J.col(j) = (evaluate(xp, t) - evaluate(xm, t)) / (2.0 * step);
        xp[j] = xm[j] = x[j];
    }
    return J;
}

Vector scattered_map(const DynamicsSpec& ds, double t, double mu_t, const Vector& x,
                     StepVariant variant) {
    if (!(mu_t > 0)) throw std::invalid_argument("scattered_map requires mu > 0");
    const Vector fx = ds.evaluate(x, t);
    return variant == StepVariant::plus ? Vector(x + mu_t * fx) : Vector(x - mu_t * fx);
}

const char* to_string(InversionError::Kind k) {
    switch (k) {
        case InversionError::Kind::singular_jacobian: return "SingularJacobian";
        case InversionError::Kind::no_convergence: return "NoConvergence";
        case InversionError::Kind::outside_omega: return "SolutionOutsideOmega";
    }
    return "?";
}

void NewtonConfig::validate() const {
    if (!(tol > 0)) throw std::invalid_argument("newton tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("newton max_iter must be >= 1");
    if (!(damping > 0 && damping <= 1)) throw std::invalid_argument("newton damping must be in (0,1]");
}

namespace {

Matrix step_jacobian(const DynamicsSpec& ds, double t, double mu, const Vector& x, StepVariant v) {
    const Matrix J = ds.jacobian(x, t);
    const Matrix I = Matrix::Identity(J.rows(), J.cols());
    return v == StepVariant::plus ? Matrix(I + mu * J) : Matrix(I - mu * J);
}

// Numerically singular: smallest full-pivot LU pivot below 1e-13 times the
// matrix scale (at least 1, the identity part of I +/- mu J).
bool is_singular(const Eigen::FullPivLU<Matrix>& lu, const Matrix& J) {
    const double scale = std::max(1.0, J.lpNorm<Eigen::Infinity>());
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    return !(min_pivot > 1e-13 * scale);
}

}  // namespace

InversionResult invert_scattered_map(const DynamicsSpec& ds, const DomainOmega& omega, double t,
                                     double mu_t, const Vector& y, StepVariant variant,
                                     const NewtonConfig& cfg, const Vector& x_init) {
    cfg.validate();
    if (!(mu_t > 0)) throw std::invalid_argument("invert_scattered_map requires mu > 0");
    const double target = cfg.tol * (1.0 + y.norm());

    auto residual_at = [&](const Vector& x) -> std::optional<Vector> {
        try {
            return Vector(scattered_map(ds, t, mu_t, x, variant) - y);
        } catch (const EvaluationFault&) {
            return std::nullopt;
        }
    };

    Vector x = x_init;
    std::optional<Vector> r = residual_at(x);
    if (!r) throw InversionError(InversionError::Kind::no_convergence,
                                 "dynamics cannot be evaluated at the initial guess", x,
                                 std::numeric_limits<double>::infinity());
    double rnorm = r->norm();

    InversionResult out;
    out.finite_difference_jacobian = !ds.has_analytic_jacobian();
    int iter = 0;
    for (; rnorm > target; ++iter) {
        if (iter >= cfg.max_iter)
            throw InversionError(InversionError::Kind::no_convergence,
                                 "Newton did not converge in " + std::to_string(cfg.max_iter) +
                                     " iterations at t=" + format_double(t) +
                                     " (residual " + format_double(rnorm) + ")",
                                 x, rnorm);
        const Matrix J = step_jacobian(ds, t, mu_t, x, variant);
        Eigen::FullPivLU<Matrix> lu(J);
        if (is_singular(lu, J))
            throw InversionError(InversionError::Kind::singular_jacobian,
                                 "step map Jacobian is singular at t=" + format_double(t), x, rnorm);
        const Vector dx = lu.solve(-*r);

        double lambda = cfg.damping;
        bool improved = false;
        Vector x_new;
        std::optional<Vector> r_new;
        for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
            x_new = x + lambda * dx;
            r_new = residual_at(x_new);
            if (r_new && r_new->norm() < rnorm) {
                improved = true;
                break;
            }
        }
        if (!improved)
            throw InversionError(InversionError::Kind::no_convergence,
                                 "Newton line search stalled at t=" + format_double(t) +
                                     " (residual " + format_double(rnorm) + ")",
                                 x, rnorm);
        x = std::move(x_new);
        r = std::move(r_new);
        rnorm = r->norm();
    }

    if (!omega.contains(x))
        throw InversionError(InversionError::Kind::outside_omega,
                             "preimage at t=" + format_double(t) + " lies outside Omega", x, rnorm);

    out.x = x;
    out.iterations = iter;
    out.residual = rnorm;
    try {
        const Matrix J = step_jacobian(ds, t, mu_t, x, variant);
        Eigen::FullPivLU<Matrix> lu(J);
        out.singular_at_solution = is_singular(lu, J);
    } catch (const EvaluationFault&) {
        out.singular_at_solution = false;
    }
    return out;
}

std::vector<Vector> box_lattice(const Box& box, int samples_per_dim) {
    if (box.lo.size() != box.hi.size() || box.lo.size() < 1)
        throw std::invalid_argument("box bounds must have equal, positive length");
    if (samples_per_dim < 1) throw std::invalid_argument("samples_per_dim must be >= 1");
    const Eigen::Index n = box.dim();
    const double total = std::pow(static_cast<double>(samples_per_dim), static_cast<double>(n));
    if (total > 1e7) throw std::invalid_argument("sampling lattice too large");
    auto coord = [&](Eigen::Index d, int i) {
        if (samples_per_dim == 1) return 0.5 * (box.lo[d] + box.hi[d]);
        return box.lo[d] + (box.hi[d] - box.lo[d]) * i / (samples_per_dim - 1);
    };
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(total));
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        Vector x(n);
        for (Eigen::Index d = 0; d < n; ++d) x[d] = coord(d, idx[static_cast<std::size_t>(d)]);
        out.push_back(std::move(x));
        Eigen::Index d = 0;
        while (d < n && ++idx[static_cast<std::size_t>(d)] == samples_per_dim) idx[static_cast<std::size_t>(d++)] = 0;
        if (d == n) break;
    }
    return out;
}

namespace {

void require_box_in_omega(const Box& box, const DomainOmega& omega) {
    // Omega is convex (box or ball), so it suffices to test the corners.
    Box corners{box.lo, box.hi};
    for (const Vector& c : box_lattice(corners, 2))
        if (!omega.contains(c)) throw std::invalid_argument("sampling box is not contained in Omega");
}

StabilityReport check_stability(const DynamicsSpec& ds, const DomainOmega& omega,
                                const TimeScale& ts, const Box& box, int samples_per_dim,
                                StepVariant variant) {
    require_box_in_omega(box, omega);
    StabilityReport rep;
    rep.hypothesis = variant == StepVariant::plus ? "forward_stability" : "backward_stability";
    const auto lattice = box_lattice(box, samples_per_dim);
    const auto rs = ts.right_scattered_points();
    rep.scattered_points = rs.size();
    rep.samples_per_point = lattice.size();
    for (double r : rs) {
        const double mu = ts.graininess(r);
        for (const Vector& x : lattice) {
            ++rep.tested;
            Vector image;
            try {
                image = scattered_map(ds, r, mu, x, variant);
            } catch (const EvaluationFault&) {
                image = Vector::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
            }
            if (!omega.contains(image)) rep.violations.push_back({r, x, image});
        }
    }
    return rep;
}

}  // namespace

StabilityReport check_forward_stability(const DynamicsSpec& ds, const DomainOmega& omega,
                                        const TimeScale& ts, const Box& box, int samples_per_dim) {
    return check_stability(ds, omega, ts, box, samples_per_dim, StepVariant::plus);
}

StabilityReport check_backward_stability(const DynamicsSpec& ds, const DomainOmega& omega,
                                         const TimeScale& ts, const Box& box, int samples_per_dim) {
    return check_stability(ds, omega, ts, box, samples_per_dim, StepVariant::minus);
}

namespace {

// Draws t from [t1, t2)_T with probability proportional to Delta-measure.
class TimeSampler {
public:
    TimeSampler(const TimeScale& ts, double t1, double t2) {
        if (t1 < t2) atoms_ = ts.decompose(t1, t2);
        else
            atoms_.push_back(Atom::scattered_step(t1, t1));
        double acc = 0.0;
        for (const Atom& a : atoms_) {
            acc += std::max(a.length(), 0.0);
            cumulative_.push_back(acc);
        }
        total_ = acc;
    }

    double operator()(std::mt19937_64& rng) const {
        if (total_ <= 0.0) return atoms_.front().lo;
        std::uniform_real_distribution<double> u(0.0, total_);
        const double v = u(rng);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), v);
        if (it == cumulative_.end()) --it;
        const Atom& a = atoms_[static_cast<std::size_t>(it - cumulative_.begin())];
        if (!a.is_dense()) return a.lo;
        std::uniform_real_distribution<double> w(a.lo, a.hi);
        return std::min(w(rng), std::nextafter(a.hi, a.lo));
    }

private:
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

Vector random_unit(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(n);
    do {
        for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

Vector random_in_ball(std::mt19937_64& rng, const Vector& c, double r) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double rad = r * std::pow(u(rng), 1.0 / static_cast<double>(c.size()));
    return c + rad * random_unit(rng, c.size());
}

}  // namespace

LipschitzEstimate estimate_lipschitz(const DynamicsSpec& ds, const DomainOmega& omega,
                                     const TimeScale& ts, const Vector& center, double radius,
                                     double t1, double t2, int n_pairs, std::uint64_t seed) {
    if (!(radius > 0)) throw std::invalid_argument("lipschitz radius must be positive");
    if (n_pairs < 2) throw std::invalid_argument("n_pairs must be >= 2");
    if (!(omega.dist_to_complement(center) > radius))
        throw std::invalid_argument("closed ball B(center, radius) is not contained in Omega");
    if (t1 > t2) std::swap(t1, t2);

    constexpr int kScales = 9;
    LipschitzEstimate est;
    est.seed = seed;
    std::mt19937_64 rng(seed);
    const TimeSampler sample_t(ts, t1, t2);

    for (int k = 0; k < kScales; ++k) {
        const double sep = radius * std::pow(10.0, -k);
        double best = 0.0;
        for (int p = 0; p < n_pairs; ++p) {
            const bool local = p % 2 == 1;
            const Vector x1 = random_in_ball(rng, center, local ? std::min(radius, sep) : radius);
            const Vector u = random_unit(rng, center.size());
            Vector x2 = x1 + sep * u;
            if ((x2 - center).norm() > radius) x2 = x1 - sep * u;
            if ((x2 - center).norm() > radius) continue;
            const double d = (x1 - x2).norm();
            if (!(d > 0)) continue;
            const double t = sample_t(rng);
            try {
                const double q = (ds.evaluate(x1, t) - ds.evaluate(x2, t)).norm() / d;
                if (std::isfinite(q)) best = std::max(best, q);
                ++est.pairs_evaluated;
            } catch (const EvaluationFault&) {
            }
        }
        est.separations.push_back(sep);
        est.max_ratio.push_back(best);
        est.L_hat = std::max(est.L_hat, best);
    }
    // growth by more than 4x over the last three decades of separation
    const double fine = est.max_ratio.back();
    const double coarse = est.max_ratio[kScales - 4];
    est.diverging = fine > 4.0 * coarse && fine > 0.0;
    return est;
}

BoundReport check_local_bound(const DynamicsSpec& ds, const TimeScale& ts, const Box& box,
                              int samples_per_dim, int t_samples_per_run) {
    std::vector<double> times;
    for (const Atom& a : ts.decompose(ts.min(), ts.max())) {
        if (!a.is_dense()) {
            times.push_back(a.lo);
            continue;
        }
        const int m = std::max(2, t_samples_per_run);
        for (int i = 0; i < m; ++i) times.push_back(a.lo + (a.hi - a.lo) * i / m);
    }
    BoundReport rep;
    for (const Vector& x : box_lattice(box, samples_per_dim)) {
        for (double t : times) {
            ++rep.samples;
            double nrm;
            try {
                nrm = ds.evaluate(x, t).norm();
            } catch (const EvaluationFault&) {
                nrm = std::numeric_limits<double>::infinity();
            }
            if (nrm > rep.max_norm || rep.argmax_x.size() == 0) {
                rep.max_norm = std::max(rep.max_norm, nrm);
                rep.argmax_t = t;
                rep.argmax_x = x;
            }
        }
    }
    return rep;
}

RegressivityReport check_regressivity(const DynamicsSpec& ds, const TimeScale& ts, const Box& box,
                                      int samples_per_dim, StepVariant variant) {
    RegressivityReport rep;
    rep.hypothesis =
        variant == StepVariant::plus ? "backward_regressivity" : "forward_regressivity";
    const auto lattice = box_lattice(box, samples_per_dim);
    for (double r : ts.right_scattered_points()) {
        const double mu = ts.graininess(r);
        int sign = 0;
        bool changed = false;
        for (const Vector& x : lattice) {
            ++rep.tested;
            Matrix J;
            try {
                J = step_jacobian(ds, r, mu, x, variant);
            } catch (const EvaluationFault&) {
                continue;
            }
            Eigen::FullPivLU<Matrix> lu(J);
            const double det = lu.determinant();
            if (is_singular(lu, J)) {
                rep.singular.push_back({r, x, det});
                continue;
            }
            const int s = det > 0 ? 1 : -1;
            if (sign != 0 && s != sign) changed = true;
            sign = s;
        }
        if (changed) rep.sign_changes.push_back(r);
    }
    return rep;
}

}  // namespace tscale
